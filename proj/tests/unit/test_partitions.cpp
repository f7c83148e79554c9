#include "mgeof/partitions.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace mgeof;

TEST_CASE("parse and print") {
  CHECK(Partition::parse("1|23").to_string() == "1|23");
  CHECK(Partition::parse("32|1").to_string() == "1|23");
  CHECK(Partition::parse("1|2|3") == Partition::finest(3));
  CHECK(Partition::parse("123") == Partition::whole(3));
  CHECK(Partition::finest(1).to_string() == "1");
  CHECK(Partition::finest(5).to_string() == "1|2|3|4|5");

  Partition big = Partition::finest(11);
  CHECK(big.to_string() == "1|2|3|4|5|6|7|8|9|10|11");
  CHECK(Partition::parse(big.to_string()) == big);
  CHECK(Partition::parse("1,2|10,11|3,4,5,6,7,8,9").blocks().size() == 3);
}

TEST_CASE("invalid partitions") {
  CHECK_THROWS_AS(Partition::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Partition::parse("1|1"), std::invalid_argument);
  CHECK_THROWS_AS(Partition::parse("1|3"), std::invalid_argument);
  CHECK_THROWS_AS(Partition::parse("1||2"), std::invalid_argument);
  CHECK_THROWS_AS(Partition::parse("a|b"), std::invalid_argument);
  CHECK_THROWS_AS(Partition({{0}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(Partition::finest(0), std::invalid_argument);
}

TEST_CASE("refines") {
  CHECK(refines(Partition::parse("1|2|3"), Partition::parse("1|23")));
  CHECK_FALSE(refines(Partition::parse("1|23"), Partition::parse("12|3")));
  CHECK_FALSE(refines(Partition::parse("1|23"), Partition::parse("1|2|3")));
  CHECK(refines(Partition::parse("12|3"), Partition::parse("12|3")));
  CHECK_THROWS_AS(refines(Partition::finest(2), Partition::finest(3)), std::invalid_argument);
}

TEST_CASE("enumeration") {
  CHECK(all_partitions(1).size() == 1);
  CHECK(all_partitions(2).size() == 2);
  CHECK(all_partitions(3).size() == 5);
  CHECK(all_partitions(4).size() == 15);
  CHECK(all_partitions(5).size() == 52);
  auto p3 = all_partitions(3);
  for (std::size_t i = 0; i < p3.size(); ++i)
    for (std::size_t j = i + 1; j < p3.size(); ++j) CHECK_FALSE(p3[i] == p3[j]);
}

TEST_CASE("property: refines is a partial order") {
  for (int n = 3; n <= 4; ++n) {
    auto ps = all_partitions(n);
    for (const auto& a : ps) {
      CHECK(refines(a, a));
      CHECK(refines(Partition::finest(n), a));
      CHECK(refines(a, Partition::whole(n)));
      CHECK(Partition::parse(a.to_string()) == a);
      for (const auto& b : ps) {
        if (refines(a, b) && refines(b, a)) CHECK(a == b);
        for (const auto& c : ps)
          if (refines(a, b) && refines(b, c)) CHECK(refines(a, c));
      }
    }
  }
}
