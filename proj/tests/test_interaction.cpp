#include <doctest.h>

#include <vector>

#include "covinfer/interaction.hpp"
#include "covinfer/oracle.hpp"
#include "support/test_support.hpp"

using namespace covinfer;
namespace ts = covinfer::testsupport;

namespace {

const ConfigSpace& space() {
  static const ConfigSpace s = demo_subject().space;
  return s;
}

Interaction parse_one(const std::string& text) {
  FinalResult parsed = parse_final_result(space(), text);
  REQUIRE(parsed.parts.size() == 1);
  return parsed.parts.front();
}

}  // namespace

TEST_CASE("satisfies per template variant") {
  Configuration c4 = ts::demo_config({0, 0, 1, 1, 1, 1, 3});
  Configuration c2 = ts::demo_config({1, 1, 0, 0, 1, 1, 0});

  CHECK(satisfies(c4, Interaction::boolean_true()));
  CHECK(satisfies(c4, parse_one("x && y && z in {0,3}")));
  CHECK_FALSE(satisfies(c4, parse_one("s && t")));
  CHECK(satisfies(c2, parse_one("s || u")));
  CHECK_FALSE(satisfies(c4, parse_one("s || t")));
  CHECK(satisfies(c4, parse_one("u && v && (x || y)")));
  CHECK(satisfies(c2, parse_one("u || v || (x && y)")));
  CHECK_FALSE(satisfies(c4, Interaction::contradiction()));
}

TEST_CASE("satisfies agrees with direct template semantics everywhere") {
  // Brute-force cross-check of the variant definitions on the full space.
  const ConfigSpace& sp = space();
  Rng rng(31337);
  std::vector<Configuration> configs = all_configurations(sp);
  for (int round = 0; round < 40; ++round) {
    std::vector<OptionIndex> available(sp.option_count());
    for (OptionIndex i = 0; i < available.size(); ++i) available[i] = i;
    rng.shuffle(available);
    SettingSet core = ts::draw_settings(sp, rng, available, 1 + rng.below(2));
    SettingSet clauses = ts::draw_settings(sp, rng, available, 1 + rng.below(2));

    Interaction conj = Interaction::make_conj(core);
    Interaction disj = Interaction::make_disj(clauses);
    Interaction conjdisj = Interaction::make_conjdisj(sp, core, clauses);
    Interaction disjconj = Interaction::make_disjconj(sp, clauses, core);

    for (const Configuration& config : configs) {
      CHECK(satisfies(config, conj) == core.contains(config));
      CHECK(satisfies(config, disj) == clauses.touches(config));
      CHECK(satisfies(config, conjdisj) ==
            (core.contains(config) && clauses.touches(config)));
      CHECK(satisfies(config, disjconj) ==
            (clauses.touches(config) || core.contains(config)));
    }
  }
}

TEST_CASE("satisfies rejects configurations from a narrower space") {
  SettingSet core;
  core.constrain(space(), 6, {0});
  Interaction phi = Interaction::make_conj(core);
  Configuration short_config({0, 0, 0});
  CHECK_THROWS_AS(satisfies(short_config, phi), ValidationError);
}

TEST_CASE("negate_core flips a conjunction into its dual disjunction") {
  // not(x and y and z in {0,3}) reads !x || !y || z in {1,2,4}.
  SettingSet core;
  core.constrain(space(), 4, {1});
  core.constrain(space(), 5, {1});
  core.constrain(space(), 6, {0, 3});
  SettingSet negated = negate_core(core, space());
  CHECK(negated.values_for(4) == std::set<ValueIndex>{0});
  CHECK(negated.values_for(5) == std::set<ValueIndex>{0});
  CHECK(negated.values_for(6) == std::set<ValueIndex>{1, 2, 4});
  CHECK(negate_core(negated, space()) == core);

  // Soundness on every configuration of the space.
  for (const Configuration& config : all_configurations(space())) {
    CHECK(satisfies(config, Interaction::make_disj(negated)) ==
          !satisfies(config, Interaction::make_conj(core)));
  }
}

TEST_CASE("negate_core over a longer mixed-domain core") {
  // not(!s and !t and u and v and z in {1,2,3}) reads
  // s || t || !u || !v || z in {0,4}.
  SettingSet core;
  core.constrain(space(), 0, {0});
  core.constrain(space(), 1, {0});
  core.constrain(space(), 2, {1});
  core.constrain(space(), 3, {1});
  core.constrain(space(), 6, {1, 2, 3});
  CHECK(render(space(), Interaction::make_disj(negate_core(core, space())), RenderStyle::Ascii) ==
        "s || t || !u || !v || z in {0,4}");
}

TEST_CASE("infer_candidates on the initial covering array, location L2") {
  // Covering: c1, c3, c5; non-covering: c2, c4. The disjunction comes out as
  // !x || !y || z in {1,2,4}.
  std::vector<Configuration> covering = {ts::demo_config({0, 0, 1, 1, 1, 0, 1}),
                                         ts::demo_config({0, 0, 1, 1, 0, 0, 2}),
                                         ts::demo_config({0, 1, 1, 1, 1, 0, 4})};
  std::vector<Configuration> non_covering = {ts::demo_config({1, 1, 0, 0, 1, 1, 0}),
                                             ts::demo_config({0, 0, 1, 1, 1, 1, 3})};
  CandidateTuple tuple = infer_candidates(space(), covering, non_covering);
  CHECK(render(space(), tuple.disj, RenderStyle::Ascii) == "!x || !y || z in {1,2,4}");
  CHECK(tuple.conj.kind() == InteractionKind::Conj);
  CHECK(satisfies(covering[0], tuple.conj));
}

TEST_CASE("infer_candidates refines L5 into the mixed template") {
  // After later iterations the covering set unions to u && v; of the
  // non-covering configurations exactly c1, c3, c4 satisfy it, so the mixed
  // candidate reads u && v && (s || t || z in {0,4}).
  std::vector<Configuration> covering = {
      ts::demo_config({0, 1, 1, 1, 1, 0, 4}),
      ts::demo_config({1, 0, 1, 1, 0, 1, 0}),
      ts::demo_config({0, 1, 1, 1, 1, 1, 2}),
      ts::demo_config({1, 1, 1, 1, 0, 0, 3}),
      ts::demo_config({1, 1, 1, 1, 1, 0, 1}),
  };
  std::vector<Configuration> non_covering = {
      ts::demo_config({0, 0, 1, 1, 1, 0, 1}),  // c1
      ts::demo_config({0, 0, 1, 1, 0, 0, 2}),  // c3
      ts::demo_config({0, 0, 1, 1, 1, 1, 3}),  // c4
  };
  CandidateTuple tuple = infer_candidates(space(), covering, non_covering);
  CHECK(render(space(), tuple.conj, RenderStyle::Ascii) == "u && v");
  CHECK(render(space(), tuple.conjdisj, RenderStyle::Ascii) == "u && v && (s || t || z in {0,4})");
  CHECK(tuple.disj_prime.length() == 5);
}

TEST_CASE("infer_candidates with no non-covering configurations degrades") {
  std::vector<Configuration> covering = all_configurations(space());
  std::vector<Configuration> non_covering;
  CandidateTuple tuple = infer_candidates(space(), covering, non_covering);
  CHECK(tuple.conj.is_true());
  CHECK(tuple.disj.is_true());
  CHECK(tuple.conjdisj.is_true());
  CHECK(tuple.disjconj.is_true());
}

TEST_CASE("infer_candidates rejects bad inputs") {
  std::vector<Configuration> covering = {ts::demo_config({0, 0, 1, 1, 1, 0, 1})};
  std::vector<Configuration> overlap = covering;
  std::vector<Configuration> none;
  CHECK_THROWS_AS(infer_candidates(space(), none, covering), ValidationError);
  CHECK_THROWS_AS(infer_candidates(space(), covering, overlap), ValidationError);
}

TEST_CASE("normalize_conjdisj drops clauses the core contradicts") {
  // Core u && v against clauses s || t || !u || !v || z in {0,4}: the !u and
  // !v clauses can never fire, leaving u && v && (s || t || z in {0,4}).
  SettingSet core;
  core.constrain(space(), 2, {1});
  core.constrain(space(), 3, {1});
  SettingSet clauses;
  clauses.constrain(space(), 0, {1});
  clauses.constrain(space(), 1, {1});
  clauses.constrain(space(), 2, {0});
  clauses.constrain(space(), 3, {0});
  clauses.constrain(space(), 6, {0, 4});
  Interaction normalized = normalize_conjdisj(space(), core, clauses);
  CHECK(render(space(), normalized, RenderStyle::Ascii) == "u && v && (s || t || z in {0,4})");
}

TEST_CASE("normalize_conjdisj collapses an implied disjunct") {
  SettingSet core;
  core.constrain(space(), 6, {0, 3});
  SettingSet clauses;
  clauses.constrain(space(), 6, {0, 3, 4});  // superset of the core set
  Interaction normalized = normalize_conjdisj(space(), core, clauses);
  CHECK(normalized == Interaction::make_conj(core));
}

TEST_CASE("normalize_conjdisj eliminates a contradiction") {
  SettingSet core;
  core.constrain(space(), 4, {1});
  SettingSet clauses;
  clauses.constrain(space(), 4, {0});
  Interaction normalized = normalize_conjdisj(space(), core, clauses);
  CHECK(normalized.is_true());
  // Brute force: no configuration satisfies core and clauses together.
  for (const Configuration& config : all_configurations(space())) {
    const bool both = satisfies(config, Interaction::make_conj(core)) &&
                      satisfies(config, Interaction::make_disj(clauses));
    CHECK_FALSE(both);
  }
}

TEST_CASE("normalize_conjdisj tightens a partial overlap without changing meaning") {
  SettingSet core;
  core.constrain(space(), 4, {1});
  core.constrain(space(), 6, {0, 3});
  SettingSet clauses;
  clauses.constrain(space(), 5, {1});
  clauses.constrain(space(), 6, {1, 2, 3, 4});
  Interaction normalized = normalize_conjdisj(space(), core, clauses);
  CHECK(normalized.clauses().values_for(6) == std::set<ValueIndex>{3});

  Interaction raw_semantics = Interaction::make_conj(core);
  for (const Configuration& config : all_configurations(space())) {
    bool direct = satisfies(config, raw_semantics) &&
                  satisfies(config, Interaction::make_disj(clauses));
    CHECK(satisfies(config, normalized) == direct);
  }
}

TEST_CASE("implies decides the demo subject relations") {
  CHECK(implies(parse_one("x && y && z in {0,3}"), parse_one("x && y"), space()) ==
        Implication::Yes);
  CHECK(implies(parse_one("x && y"), parse_one("!x || !y"), space()) == Implication::No);
  CHECK(implies(parse_one("u && v && (s || t)"), parse_one("u && v"), space()) ==
        Implication::Yes);
  CHECK(implies(parse_one("u && v"), parse_one("u && v && (s || t)"), space()) ==
        Implication::No);
  CHECK(implies(Interaction::contradiction(), parse_one("x"), space()) == Implication::Yes);
  CHECK(implies(parse_one("x"), Interaction::boolean_true(), space()) == Implication::Yes);
}

TEST_CASE("implies agrees with full-space brute force") {
  const ConfigSpace& sp = space();
  Rng rng(777);
  for (int round = 0; round < 200; ++round) {
    auto draw = [&]() {
      std::vector<OptionIndex> available(sp.option_count());
      for (OptionIndex i = 0; i < available.size(); ++i) available[i] = i;
      rng.shuffle(available);
      SettingSet first = ts::draw_settings(sp, rng, available, 1 + rng.below(2));
      SettingSet second = ts::draw_settings(sp, rng, available, 1 + rng.below(2));
      switch (rng.below(4)) {
        case 0:
          return Interaction::make_conj(first);
        case 1:
          return Interaction::make_disj(first);
        case 2:
          return Interaction::make_conjdisj(sp, first, second);
        default:
          return Interaction::make_disjconj(sp, first, second);
      }
    };
    Interaction phi = draw();
    Interaction psi = draw();
    CHECK(implies(phi, psi, sp) == ts::brute_force_implies(sp, phi, psi));
  }
}

TEST_CASE("implies returns unknown only above the cap") {
  Interaction phi = parse_one("x && y && z in {0,3}");
  Interaction psi = parse_one("x && y");
  // Mentioned-option product is 2*2*5 = 20.
  CHECK(implies(phi, psi, space(), 20) == Implication::Yes);
  CHECK(implies(phi, psi, space(), 19) == Implication::Unknown);
}

TEST_CASE("check keeps satisfied candidates and eliminates the rest") {
  std::vector<Configuration> covering = {ts::demo_config({1, 1, 0, 0, 1, 1, 0}),
                                         ts::demo_config({0, 0, 1, 1, 1, 1, 3})};
  Interaction phi = parse_one("x && y");
  CHECK(check(phi, covering) == phi);

  Interaction stale = parse_one("s || u");  // c2 falsifies u, c4 falsifies s? c4 has u=1
  // c2 = (1,1,0,0,...): s=1 fires; craft one that fails instead.
  Interaction falsified = parse_one("!x");
  CHECK(check(falsified, covering).is_true());
  CHECK(check(Interaction::boolean_true(), covering).is_true());
  CHECK(satisfies(covering[0], stale));
}

TEST_CASE("sel_strongest keeps the mixed template for L5") {
  CandidateTuple tuple;
  tuple.conj = parse_one("u && v");
  tuple.disj = Interaction::boolean_true();
  tuple.conjdisj = parse_one("u && v && (s || t)");
  tuple.disjconj = Interaction::boolean_true();
  FinalResult result = sel_strongest(space(), tuple);
  REQUIRE(result.parts.size() == 1);
  CHECK(result.parts.front() == tuple.conjdisj);
}

TEST_CASE("sel_strongest of all-true candidates is true") {
  CandidateTuple tuple;
  FinalResult result = sel_strongest(space(), tuple);
  CHECK(result.is_true());
}

TEST_CASE("sel_strongest keeps incomparable survivors as a conjunction") {
  // Crafted so conj and disj are incomparable: x && y covers configurations
  // the disjunction rejects and vice versa.
  CandidateTuple tuple;
  tuple.conj = parse_one("x");
  tuple.disj = parse_one("y || z in {0}");
  tuple.conjdisj = tuple.conj;
  tuple.disjconj = tuple.disj;
  CHECK(ts::brute_force_implies(space(), tuple.conj, tuple.disj) == Implication::No);
  CHECK(ts::brute_force_implies(space(), tuple.disj, tuple.conj) == Implication::No);
  FinalResult result = sel_strongest(space(), tuple);
  REQUIRE(result.parts.size() == 2);
  for (const Configuration& config : all_configurations(space())) {
    CHECK(satisfies(config, result) ==
          (satisfies(config, tuple.conj) && satisfies(config, tuple.disj)));
  }
}

TEST_CASE("sel_strongest keeps one representative of logically equal candidates") {
  CandidateTuple tuple;
  SettingSet single;
  single.constrain(space(), 4, {1});
  tuple.conj = Interaction::make_conj(single);
  tuple.disj = Interaction::make_disj(single);  // same meaning, different shape
  tuple.conjdisj = tuple.conj;
  tuple.disjconj = tuple.conj;
  FinalResult result = sel_strongest(space(), tuple);
  REQUIRE(result.parts.size() == 1);
  CHECK(result.parts.front() == tuple.conj);
}

TEST_CASE("rendering forms") {
  CHECK(render(space(), parse_one("x && y && z in {0,3,4}")) ==
        "x ∧ y ∧ z∈{0,3,4}");
  CHECK(render(space(), Interaction::boolean_true()) == "true");
  CHECK(render(space(), Interaction::contradiction()) == "false");
  CHECK(render(space(), parse_one("!x || !y")) == "¬x ∨ ¬y");
  CHECK(render(space(), parse_one("u && v && (s || t)"), RenderStyle::Ascii) ==
        "u && v && (s || t)");
  CHECK(render(space(), parse_one("s || t || (u && v)"), RenderStyle::Ascii) ==
        "s || t || (u && v)");
  FinalResult multi = make_final_result({parse_one("u && v"), parse_one("s || t")});
  CHECK(render(space(), multi, RenderStyle::Ascii) == "(u && v) && (s || t)");
}

TEST_CASE("sel_strongest output implies every checked component") {
  // The selected conjunction is the greatest lower bound of the survivors.
  const ConfigSpace& sp = space();
  Rng rng(606);
  std::vector<Configuration> universe = all_configurations(sp);
  for (int round = 0; round < 40; ++round) {
    rng.shuffle(universe);
    const std::size_t cov_count = 1 + rng.below(12);
    const std::size_t ncov_count = rng.below(12);
    std::vector<Configuration> covering(universe.begin(), universe.begin() + cov_count);
    std::vector<Configuration> non_covering(universe.begin() + cov_count,
                                            universe.begin() + cov_count + ncov_count);
    CandidateTuple tuple = infer_candidates(sp, covering, non_covering);
    CandidateTuple checked = tuple;
    checked.conj = check(tuple.conj, covering);
    checked.disj = check(tuple.disj, covering);
    checked.conjdisj = check(tuple.conjdisj, covering);
    checked.disjconj = check(tuple.disjconj, covering);
    FinalResult selected = sel_strongest(sp, checked);
    for (const Interaction* component :
         {&checked.conj, &checked.disj, &checked.conjdisj, &checked.disjconj}) {
      CHECK(implies(selected, FinalResult{{*component}}, sp) == Implication::Yes);
    }
  }
}
