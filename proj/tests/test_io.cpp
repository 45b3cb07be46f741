#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dbmatch/errors.hpp"
#include "dbmatch/model_io.hpp"
#include "test_support.hpp"

namespace dbmatch {
namespace {

TEST(DatabaseCsv, RoundTrip) {
  Rng rng(1);
  for (std::size_t q : {2u, 3u, 17u}) {
    const auto db = testing::random_database(rng, 5, 8, q);
    std::stringstream ss;
    write_database_csv(ss, db);
    EXPECT_EQ(read_database_csv(ss), db);
  }
}

TEST(DatabaseCsv, LayoutIsHeaderThenRows) {
  std::stringstream ss;
  write_database_csv(ss, Database(2, 3, 2, {0, 1, 1, 1, 0, 0}));
  EXPECT_EQ(ss.str(), "2,3,2\n0,1,1\n1,0,0\n");
}

TEST(DatabaseCsv, ZeroColumnRoundTrip) {
  const Database db(3, 0, 2, {});
  std::stringstream ss;
  write_database_csv(ss, db);
  EXPECT_EQ(read_database_csv(ss), db);
}

TEST(DatabaseCsv, RejectsMalformedInput) {
  for (const char* text : {"", "2,2\n", "1,2,2\n0\n", "1,2,2\n0,2\n", "2,1,2\n0\n", "1,1,2\nx\n"}) {
    std::stringstream ss(text);
    EXPECT_THROW(read_database_csv(ss), ArgumentError) << text;
  }
}

TEST(KeyValues, RoundTripAndComments) {
  KeyValues kv{{"a", "1"}, {"b.c", "x y z"}};
  std::stringstream ss;
  write_key_values(ss, kv);
  EXPECT_EQ(read_key_values(ss), kv);
  std::stringstream with_comment("# note\na=1\n\nb.c=x y z\n");
  EXPECT_EQ(read_key_values(with_comment), kv);
  std::stringstream bad("novalue\n");
  EXPECT_THROW(read_key_values(bad), ArgumentError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::exp2(static_cast<double>(rng.below(80)) - 40);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_THROW(parse_double("1.5x"), ArgumentError);
}

TEST(Experiment, SaveLoadIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "dbmatch_io_test";
  std::filesystem::create_directories(dir);
  const auto c1 = sample_database(Distribution::uniform(3), 12, 20, 5);
  auto exp = apply_deletion_channel(c1, 0.35, 0.5, 6);
  exp.master_seed = 1234567890123ULL;
  save_experiment(dir / "exp", exp);
  EXPECT_TRUE(std::filesystem::exists(dir / "exp.c1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "exp.manifest"));
  const auto back = load_experiment(dir / "exp");
  EXPECT_EQ(back, exp);
  EXPECT_EQ(back.deletion.delta, 0.35);

  std::ofstream(dir / "exp.c2.csv") << "1,1,3\n0\n";
  EXPECT_THROW(load_experiment(dir / "exp"), ArgumentError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dbmatch
