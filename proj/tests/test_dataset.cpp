#include "survgroup/dataset.hpp"

#include <vector>

#include "doctest.h"
#include "survgroup/errors.hpp"
#include "test_util.hpp"

using namespace survgroup;

namespace {

SurvivalDataset tiny() {
  return SurvivalDataset({{1.0, 2.0, 3.0}, {0.5, 0.25, 0.75}}, {3.0, 1.0, 2.0}, {1, 1, 0},
                         {"a", "b"});
}

}  // namespace

TEST_CASE("dataset constructor validates every invariant") {
  CHECK_THROWS_AS(SurvivalDataset({}, {1.0}, {1}, {}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset({{}}, {}, {}, {"a"}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0, 2.0}}, {1.0, 2.0}, {1}, {"a"}), ShapeError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0, 2.0}}, {1.0, 2.0}, {1, 1}, {"a", "b"}), ShapeError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0}, {1.0, 2.0}}, {1.0}, {1}, {"a", "b"}), ShapeError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0, 2.0}}, {1.0, -0.5}, {1, 1}, {"a"}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0, 2.0}}, {1.0, 2.0}, {1, 2}, {"a"}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset({{1.0, 2.0}}, {1.0, 2.0}, {0, 0}, {"a"}), ValidationError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(SurvivalDataset({{1.0, nan}}, {1.0, 2.0}, {1, 1}, {"a"}), ValidationError);
  CHECK_NOTHROW(SurvivalDataset({{1.0, 2.0}}, {0.0, 2.0}, {0, 1}, {"a"}));
}

TEST_CASE("dataset accessors expose column-major storage") {
  const SurvivalDataset data = tiny();
  CHECK(data.n() == 3);
  CHECK(data.p() == 2);
  CHECK(data.x(0, 0) == 1.0);
  CHECK(data.x(2, 1) == 0.75);
  CHECK(data.column(1)[1] == 0.25);
  CHECK(data.feature_names()[0] == "a");
  CHECK(data.feature_ranges()[0] == std::pair<double, double>{1.0, 3.0});
  CHECK(data.feature_ranges()[1] == std::pair<double, double>{0.25, 0.75});
}

TEST_CASE("unique_event_times drops censored and duplicate times, sorted") {
  const SurvivalDataset data({{0, 0, 0, 0, 0}}, {3.0, 1.0, 2.0, 1.0, 5.0}, {1, 1, 0, 1, 0},
                             {"a"});
  CHECK(unique_event_times(data) == std::vector<double>{1.0, 3.0});
}

TEST_CASE("content_hash is deterministic and content-sensitive") {
  CHECK(tiny().content_hash() == tiny().content_hash());
  const SurvivalDataset other({{1.0, 2.0, 3.0}, {0.5, 0.25, 0.75}}, {3.0, 1.0, 2.5}, {1, 1, 0},
                              {"a", "b"});
  CHECK(other.content_hash() != tiny().content_hash());
}

TEST_CASE("with_permuted_outcomes moves outcome pairs, not covariates") {
  const SurvivalDataset data = tiny();

  std::vector<std::size_t> identity{0, 1, 2};
  const SurvivalDataset same = data.with_permuted_outcomes(identity);
  CHECK(same.times() == data.times());
  CHECK(same.events() == data.events());
  // permuted datasets never share a cache key with their source, even when
  // the permutation happens to be the identity
  CHECK(same.content_hash() != data.content_hash());

  std::vector<std::size_t> perm{2, 0, 1};
  const SurvivalDataset shuffled = data.with_permuted_outcomes(perm);
  CHECK(shuffled.times() == std::vector<double>{2.0, 3.0, 1.0});
  CHECK(shuffled.events() == std::vector<std::uint8_t>{0, 1, 1});
  for (std::size_t j = 0; j < data.p(); ++j)
    for (std::size_t i = 0; i < data.n(); ++i) CHECK(shuffled.x(i, j) == data.x(i, j));
  // source unchanged
  CHECK(data.times() == std::vector<double>{3.0, 1.0, 2.0});

  std::vector<std::size_t> short_perm{0, 1};
  CHECK_THROWS_AS(data.with_permuted_outcomes(short_perm), ShapeError);
  std::vector<std::size_t> out_of_range{0, 1, 7};
  CHECK_THROWS_AS(data.with_permuted_outcomes(out_of_range), ArgumentError);
}

TEST_CASE("load_csv round-trips numeric data and parses event spellings") {
  testutil::TempDir dir("survgroup_csv");
  const auto path = dir.file("data.csv");
  testutil::write_text(path,
                       "age,T,E\n"
                       "50,10,1\n"
                       "60.5,5,false\n"
                       "70,2.5,TRUE\n");
  const SurvivalDataset data = load_csv(path, "T", "E");
  CHECK(data.n() == 3);
  CHECK(data.p() == 1);
  CHECK(data.feature_names() == std::vector<std::string>{"age"});
  CHECK(data.column(0)[1] == 60.5);
  CHECK(data.times() == std::vector<double>{10.0, 5.0, 2.5});
  CHECK(data.events() == std::vector<std::uint8_t>{1, 0, 1});
}

TEST_CASE("load_csv one-hot expands text columns with sorted value names") {
  testutil::TempDir dir("survgroup_csv");
  const auto path = dir.file("data.csv");
  testutil::write_text(path,
                       "age,grp,T,E\n"
                       "50,b,10,1\n"
                       "60,a,5,0\n"
                       "70,b,2,1\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ParseError);  // text needs one_hot

  const SurvivalDataset data = load_csv(path, "T", "E", true);
  CHECK(data.feature_names() == std::vector<std::string>{"age", "grp=a", "grp=b"});
  CHECK(std::vector<double>(data.column(1).begin(), data.column(1).end()) ==
        std::vector<double>{0.0, 1.0, 0.0});
  CHECK(std::vector<double>(data.column(2).begin(), data.column(2).end()) ==
        std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("load_csv rejects malformed files with specific errors") {
  testutil::TempDir dir("survgroup_csv");
  const auto path = dir.file("data.csv");

  CHECK_THROWS_AS(load_csv(dir.file("absent.csv"), "T", "E"), IoError);

  testutil::write_text(path, "");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ValidationError);

  testutil::write_text(path, "a,T,E\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ValidationError);  // header only

  testutil::write_text(path, "a,a,T,E\n1,2,3,1\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ValidationError);  // duplicate header

  testutil::write_text(path, "a,T,E\n1,2,1\n");
  CHECK_THROWS_AS(load_csv(path, "T", "missing"), ColumnError);
  CHECK_THROWS_AS(load_csv(path, "T", "T"), ColumnError);

  testutil::write_text(path, "a,T,E\n1,2\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ParseError);  // ragged row

  testutil::write_text(path, "a,T,E\n1,abc,1\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ParseError);  // bad time

  testutil::write_text(path, "a,T,E\n1,2,yes\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ValidationError);  // bad event

  testutil::write_text(path, "T,E\n1,1\n");
  CHECK_THROWS_AS(load_csv(path, "T", "E"), ValidationError);  // no features left
}
