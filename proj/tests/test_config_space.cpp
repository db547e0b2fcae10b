#include <doctest.h>

#include <algorithm>
#include <set>

#include "covinfer/config_space.hpp"
#include "covinfer/oracle.hpp"
#include "support/test_support.hpp"

using namespace covinfer;
namespace ts = covinfer::testsupport;

namespace {

ConfigSpace demo_space() { return demo_subject().space; }

ConfigSpace small_space(std::vector<std::size_t> domain_sizes) {
  std::vector<OptionDomain> options;
  for (std::size_t i = 0; i < domain_sizes.size(); ++i) {
    OptionDomain option;
    option.name = std::string(1, static_cast<char>('a' + i));
    for (std::size_t v = 0; v < domain_sizes[i]; ++v) option.values.push_back(std::to_string(v));
    options.push_back(std::move(option));
  }
  return ConfigSpace(std::move(options));
}

}  // namespace

TEST_CASE("space validation") {
  auto make = [](std::vector<OptionDomain> options) { return ConfigSpace(std::move(options)); };
  CHECK_THROWS_AS(make({{"a", {"0", "1"}}, {"a", {"0", "1"}}}), ValidationError);
  CHECK_THROWS_AS(make({{"a", {"0"}}}), ValidationError);
  CHECK_THROWS_AS(make({{"a", {"0", "0"}}}), ValidationError);
  CHECK_THROWS_AS(make({{"", {"0", "1"}}}), ValidationError);

  ConfigSpace space = small_space({2, 3});
  CHECK_THROWS_AS(space.set_default_config({{"a", "0"}}), ValidationError);  // missing b
  CHECK_THROWS_AS(space.set_default_config({{"a", "0"}, {"b", "7"}}), ValidationError);
  CHECK_THROWS_AS(space.set_default_config({{"a", "0"}, {"b", "1"}, {"c", "0"}}),
                  ValidationError);
  space.set_default_config({{"a", "1"}, {"b", "2"}});
  CHECK(space.default_config().has_value());
}

TEST_CASE("space size is exact") {
  CHECK(demo_space().space_size_decimal() == "320");
  std::uint64_t size = 0;
  CHECK(demo_space().space_size_at_most(320, &size));
  CHECK(size == 320);
  CHECK_FALSE(demo_space().space_size_at_most(319));

  // 25 ten-valued options exceed 64 bits; the decimal form stays exact.
  std::vector<OptionDomain> options;
  for (int i = 0; i < 25; ++i) {
    OptionDomain option;
    option.name = "o" + std::to_string(i);
    for (int v = 0; v < 10; ++v) option.values.push_back(std::to_string(v));
    options.push_back(std::move(option));
  }
  ConfigSpace big(std::move(options));
  CHECK(big.space_size_decimal() == "1" + std::string(25, '0'));
  CHECK_FALSE(big.space_size_at_most(std::numeric_limits<std::uint64_t>::max()));
}

TEST_CASE("canonical configuration strings round-trip") {
  ConfigSpace space = demo_space();
  Configuration c4 = ts::demo_config({0, 0, 1, 1, 1, 1, 3});
  std::string text = canonical_config_string(space, c4);
  CHECK(text == "s=0,t=0,u=1,v=1,x=1,y=1,z=3");
  CHECK(parse_canonical_config(space, text) == c4);
  CHECK_THROWS_AS(parse_canonical_config(space, "s=0"), ValidationError);
  CHECK_THROWS_AS(parse_canonical_config(space, text + ",w=1"), ValidationError);
  CHECK_THROWS_AS(parse_canonical_config(space, "s=0,s=1,u=1,v=1,x=1,y=1,z=3"), ValidationError);
}

TEST_CASE("pointwise union of c2 and c4 constrains x, y and z") {
  ConfigSpace space = demo_space();
  std::vector<Configuration> configs = {ts::demo_config({1, 1, 0, 0, 1, 1, 0}),
                                        ts::demo_config({0, 0, 1, 1, 1, 1, 3})};
  SettingSet united = pointwise_union(space, configs);
  CHECK(united.length() == 3);
  CHECK(united.values_for(4) == std::set<ValueIndex>{1});     // x
  CHECK(united.values_for(5) == std::set<ValueIndex>{1});     // y
  CHECK(united.values_for(6) == std::set<ValueIndex>{0, 3});  // z
  CHECK_FALSE(united.constrains(0));
}

TEST_CASE("pointwise union of a single configuration pins every option") {
  ConfigSpace space = small_space({2, 2, 2});
  std::vector<Configuration> configs = {Configuration({1, 0, 1})};
  SettingSet united = pointwise_union(space, configs);
  CHECK(united.length() == 3);
  for (OptionIndex o = 0; o < 3; ++o) {
    CHECK(united.values_for(o).size() == 1);
  }
}

TEST_CASE("pointwise union over the whole space is unconstrained") {
  ConfigSpace space = demo_space();
  std::vector<Configuration> configs = all_configurations(space);
  CHECK(configs.size() == 320);
  CHECK(pointwise_union(space, configs).empty());
}

TEST_CASE("pointwise union rejects an empty input") {
  ConfigSpace space = demo_space();
  std::vector<Configuration> none;
  CHECK_THROWS_AS(pointwise_union(space, none), ValidationError);
}

TEST_CASE("pointwise union properties") {
  // Order and grouping cannot matter, and adding configurations only widens.
  ConfigSpace space = small_space({2, 3, 4, 2});
  Rng rng(20240611);
  for (int round = 0; round < 200; ++round) {
    std::vector<Configuration> configs;
    const std::size_t count = 1 + rng.below(6);
    for (std::size_t i = 0; i < count; ++i) {
      configs.push_back(complete_randomly(SettingSet(), space, rng));
    }
    SettingSet united = pointwise_union(space, configs);

    std::vector<Configuration> shuffled = configs;
    rng.shuffle(shuffled);
    CHECK(pointwise_union(space, shuffled) == united);

    std::vector<Configuration> doubled = configs;
    doubled.insert(doubled.end(), configs.begin(), configs.end());
    CHECK(pointwise_union(space, doubled) == united);

    for (const Configuration& config : configs) {
      CHECK(united.contains(config));
    }

    // Monotonicity: every constraint of a subset's union is a subset of the
    // superset's constraint (or the superset dropped the option entirely).
    std::vector<Configuration> prefix(configs.begin(), configs.begin() + 1 + rng.below(count));
    SettingSet narrower = pointwise_union(space, prefix);
    for (const auto& [option, values] : narrower.constraints()) {
      if (!united.constrains(option)) continue;
      const std::set<ValueIndex>& wider = united.values_for(option);
      CHECK(std::includes(wider.begin(), wider.end(), values.begin(), values.end()));
    }
  }
}

TEST_CASE("covering array hits every option value with max-domain rows") {
  ConfigSpace space = demo_space();
  Rng rng(7);
  std::vector<Configuration> array = one_way_covering_array(space, rng);
  CHECK(array.size() == 5);

  for (OptionIndex option = 0; option < space.option_count(); ++option) {
    for (std::size_t v = 0; v < space.option(option).values.size(); ++v) {
      bool found = false;
      for (const Configuration& config : array) {
        if (config.value_at(option) == v) found = true;
      }
      CHECK_MESSAGE(found, "missing value ", v, " of option ", space.option(option).name);
    }
  }
}

TEST_CASE("covering array of one boolean option is both settings") {
  ConfigSpace space = small_space({2});
  Rng rng(3);
  std::vector<Configuration> array = one_way_covering_array(space, rng);
  REQUIRE(array.size() == 2);
  std::set<ValueIndex> seen = {array[0].value_at(0), array[1].value_at(0)};
  CHECK(seen == std::set<ValueIndex>{0, 1});
}

TEST_CASE("covering array coverage scan on mixed domains") {
  ConfigSpace space = small_space({2, 3, 4});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<Configuration> array = one_way_covering_array(space, rng);
    CHECK(array.size() == 4);
    std::size_t pairs = 0;
    for (OptionIndex option = 0; option < space.option_count(); ++option) {
      for (std::size_t v = 0; v < space.option(option).values.size(); ++v) {
        bool found = false;
        for (const Configuration& config : array) {
          if (config.value_at(option) == v) found = true;
        }
        if (found) ++pairs;
      }
    }
    CHECK(pairs == 9);
  }
}

TEST_CASE("all_configurations enumerates lexicographically without duplicates") {
  ConfigSpace space = small_space({2, 2, 2});
  std::vector<Configuration> configs = all_configurations(space);
  REQUIRE(configs.size() == 8);
  // Base-2 counting, first option most significant.
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::size_t expected[3] = {(i >> 2) & 1, (i >> 1) & 1, i & 1};
    for (OptionIndex o = 0; o < 3; ++o) {
      CHECK(configs[i].value_at(o) == expected[o]);
    }
  }
  std::set<Configuration> unique(configs.begin(), configs.end());
  CHECK(unique.size() == configs.size());

  ConfigSpace single = small_space({2});
  std::vector<Configuration> pair = all_configurations(single);
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].value_at(0) == 0);
  CHECK(pair[1].value_at(0) == 1);
}

TEST_CASE("all_configurations refuses spaces over the cap") {
  ConfigSpace space = demo_space();
  try {
    all_configurations(space, 100);
    FAIL("expected a refusal");
  } catch (const ValidationError& e) {
    std::string message = e.what();
    CHECK(message.find("320") != std::string::npos);
    CHECK(message.find("100") != std::string::npos);
  }
}

TEST_CASE("complete_randomly honors constraints") {
  ConfigSpace space = demo_space();
  SettingSet partial;
  partial.constrain(space, 6, {0, 3});  // z
  partial.constrain(space, 4, {1});     // x

  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    Configuration config = complete_randomly(partial, space, rng);
    CHECK(config.value_at(4) == 1);
    CHECK((config.value_at(6) == 0 || config.value_at(6) == 3));
  }

  // Unconstrained completion yields valid configurations.
  Configuration any = complete_randomly(SettingSet(), space, rng);
  CHECK(any.size() == space.option_count());

  // Same seed, same draws.
  Rng a(1234), b(1234);
  for (int i = 0; i < 20; ++i) {
    CHECK(complete_randomly(partial, space, a) == complete_randomly(partial, space, b));
  }
}

TEST_CASE("setting set negation is an involution") {
  ConfigSpace space = demo_space();
  Rng rng(5150);
  for (int round = 0; round < 100; ++round) {
    std::vector<Configuration> configs;
    const std::size_t count = 1 + rng.below(4);
    for (std::size_t i = 0; i < count; ++i) {
      configs.push_back(complete_randomly(SettingSet(), space, rng));
    }
    SettingSet united = pointwise_union(space, configs);
    CHECK(united.negated(space).negated(space) == united);
  }
}
