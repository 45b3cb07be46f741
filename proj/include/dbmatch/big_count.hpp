#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace dbmatch {

/// Exact nonnegative integer of unbounded magnitude.
using BigCount = boost::multiprecision::cpp_int;

/// log2 of a positive count, accurate to double precision; -inf for zero.
double log2_count(const BigCount& value);

}  // namespace dbmatch
