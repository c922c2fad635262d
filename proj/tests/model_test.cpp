#include <gtest/gtest.h>

#include "costlam/model.hpp"
#include "costlam/parse.hpp"

using namespace costlam;

namespace {

Lattice data_lattice(const std::string& name) { return load_lattice_file(std::string(COSTLAM_TEST_DATA) + "/" + name); }

std::set<std::string> labels(const Lattice& lat, const std::vector<Element>& es) {
  std::set<std::string> out;
  for (auto& e : es) out.insert(lat.format(e));
  return out;
}

std::set<std::string> printed(const Lattice& lat, const std::vector<Section>& ss) {
  std::set<std::string> out;
  for (auto& s : ss) out.insert(format(s.value, lat) + "@" + lat.format(s.bound));
  return out;
}

EnumBudget sound_budget(const Lattice& lat) {
  EnumBudget b;
  b.deltas = DeltaProfile::defaults(lat);
  return b;
}

}  // namespace

TEST(Downset, Examples) {
  auto c2 = chain2();
  auto d = build_downset(c2);
  EXPECT_EQ(labels(c2, d.at(c2.finite_element("top"))), (std::set<std::string>{"bot", "top"}));
  EXPECT_EQ(labels(c2, d.at(c2.bottom())), (std::set<std::string>{"bot"}));

  auto s3 = Lattice::saturating(3);
  EXPECT_EQ(labels(s3, build_downset(s3).at(s3.natural(2))), (std::set<std::string>{"0", "1", "2"}));
  EXPECT_TRUE(check_downset(build_downset(data_lattice("cube.lat"))).passed);
}

TEST(Downset, CorruptedInclusionIsCaught) {
  auto s3 = Lattice::saturating(3);
  auto d = build_downset(s3);
  d.down[2].pop_back();  // drop 2 from downset(2)
  auto r = check_downset(d);
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.counterexample.empty());
}

TEST(InternalNaturality, LawfulLatticesPass) {
  EXPECT_TRUE(check_internal_naturality(chain2()).passed);
  EXPECT_TRUE(check_internal_naturality(Lattice::saturating(4)).passed);
  for (auto name : {"chain3.lat", "diamond.lat", "pentagon.lat", "cube.lat"})
    EXPECT_TRUE(check_internal_naturality(data_lattice(name)).passed) << name;
}

TEST(InternalNaturality, NonMonotoneCombineFails) {
  auto r = check_internal_naturality(data_lattice("bad/nonmonotone.lat"));
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.counterexample.find("monotone"), std::string::npos);
}

TEST(InternalNaturality, UnrestrictedCombineClosureOnlyForIdempotentCombine) {
  // 1, 1 <= 1 but 1 + 1 = 2 is not: additive combine leaves the downset.
  auto sat = check_internal_naturality_detailed(Lattice::saturating(4));
  EXPECT_FALSE(sat.literal_combine.passed);
  EXPECT_NE(sat.literal_combine.counterexample.find("r1=1 r2=1 a=1 b=1"), std::string::npos);
  // With combine = join every downset is closed.
  EXPECT_TRUE(check_internal_naturality_detailed(data_lattice("diamond.lat")).literal_combine.passed);
}

TEST(Interpret, BoolSectionsAtEveryIndex) {
  auto s3 = Lattice::saturating(3);
  auto rep = interpret_type(Type::boolean(), s3, sound_budget(s3));
  for (auto& r : s3.elements()) EXPECT_EQ(printed(s3, rep.at(r)), (std::set<std::string>{"tt@0", "ff@0"}));
  EXPECT_TRUE(rep.exhaustive);
}

TEST(Interpret, ProductAtBottom) {
  auto s3 = Lattice::saturating(3);
  auto rep = interpret_type(Type::prod(Type::boolean(), Type::boolean()), s3, sound_budget(s3));
  const auto& bot = rep.at(s3.bottom());
  EXPECT_EQ(bot.size(), 4u);
  for (auto& s : bot) EXPECT_EQ(s.bound, s3.bottom());
}

TEST(Interpret, BoxAtBottomGrade) {
  auto c2 = chain2();
  auto rep = interpret_type(Type::box(c2.bottom(), Type::boolean()), c2, sound_budget(c2));
  for (auto& r : c2.elements())
    EXPECT_EQ(printed(c2, rep.at(r)), (std::set<std::string>{"box[bot] tt@bot", "box[bot] ff@bot"}));
}

TEST(Interpret, NatIsTruncated) {
  auto c2 = chain2();
  auto rep = interpret_type(Type::nat(), c2, sound_budget(c2));
  EXPECT_EQ(rep.at(c2.bottom()).size(), 4u);  // 0..3
}

TEST(Interpret, ArrowSectionNeedsApplicationCost) {
  // lam x . if x then ff else tt has latent 1; one application costs
  // 0 (+) 1 (+) d_app = 2, so the lambda appears from index 2 upward.
  auto s3 = Lattice::saturating(3);
  auto a = Type::arrow(Type::boolean(), Type::boolean(), s3.natural(3));
  auto rep = interpret_type(a, s3, sound_budget(s3));
  auto has_not = [&](const Element& r) {
    for (auto& s : rep.at(r))
      if (format(s.value, s3) == "lam x : Bool . if x then ff else tt") return true;
    return false;
  };
  EXPECT_FALSE(has_not(s3.natural(1)));
  EXPECT_TRUE(has_not(s3.natural(2)));
  EXPECT_TRUE(has_not(s3.natural(3)));
  EXPECT_GT(rep.corpus, 0u);
  for (auto& s : rep.at(s3.natural(3))) EXPECT_EQ(s.bound, s3.bottom());
}

TEST(Interpret, PaperModeArrowBoundIsBodyBound) {
  auto s3 = Lattice::saturating(3);
  auto budget = sound_budget(s3);
  budget.mode = Mode::Paper;
  auto rep = interpret_type(Type::arrow(Type::boolean(), Type::boolean()), s3, budget);
  bool seen = false;
  for (auto& s : rep.at(s3.natural(3)))
    if (format(s.value, s3) == "lam x : Bool . if x then ff else tt") {
      seen = true;
      EXPECT_EQ(s.bound, s3.natural(1));
    }
  EXPECT_TRUE(seen);
}

TEST(Presheaf, PassesOnBuiltReps) {
  auto s3 = Lattice::saturating(3);
  EXPECT_TRUE(check_presheaf(interpret_type(Type::boolean(), s3, sound_budget(s3))).passed);
  auto rep = interpret_type(Type::prod(Type::boolean(), Type::boolean()), s3, sound_budget(s3));
  auto r = check_presheaf(rep);
  EXPECT_TRUE(r.passed) << r.counterexample;
  EXPECT_GT(r.checked, 0u);
}

TEST(Presheaf, DeletedSectionAtLargerIndexFails) {
  auto s3 = Lattice::saturating(3);
  auto rep = interpret_type(Type::prod(Type::boolean(), Type::boolean()), s3, sound_budget(s3));
  rep.sections[rep.index_of(s3.natural(3))].pop_back();
  auto r = check_presheaf(rep);
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.counterexample.find("r2=3"), std::string::npos);
}

TEST(CostNaturality, PassesOnBox) {
  auto s3 = Lattice::saturating(3);
  for (std::uint64_t s = 0; s <= 3; ++s) {
    auto rep = interpret_type(Type::box(s3.natural(s), Type::boolean()), s3, sound_budget(s3));
    EXPECT_TRUE(check_cost_naturality(rep).passed);
  }
}

TEST(CostNaturality, RewrittenBoundFails) {
  auto s3 = Lattice::saturating(3);
  auto rep = interpret_type(Type::box(s3.natural(2), Type::boolean()), s3, sound_budget(s3));
  auto key = std::pair<std::size_t, std::size_t>{rep.index_of(s3.natural(0)), rep.index_of(s3.natural(2))};
  rep.transitions[key][0].bound = s3.natural(1);
  EXPECT_FALSE(check_cost_naturality(rep).passed);
}

TEST(Reification, Clauses) {
  auto s3 = Lattice::saturating(3);
  Interpreter in(s3, sound_budget(s3));
  for (auto ty : {Type::boolean(), Type::box(s3.natural(3), Type::boolean()),
                  Type::arrow(Type::boolean(), Type::boolean(), s3.natural(3))}) {
    auto rep = in.interpret(ty);
    auto r = reify_and_check(rep, in.typechecker(), in.evaluator());
    EXPECT_TRUE(r.passed) << r.counterexample;
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(BoxSubpresheaf, EmbedsIntoBody) {
  auto d = data_lattice("diamond.lat");
  Interpreter in(d, sound_budget(d));
  auto inner = in.interpret(Type::prod(Type::boolean(), Type::boolean()));
  for (auto& s : d.elements()) {
    auto boxed = in.interpret(Type::box(s, Type::prod(Type::boolean(), Type::boolean())));
    EXPECT_TRUE(check_box_subpresheaf(boxed, inner).passed);
  }
}

TEST(ModelSuite, Chain2BothModes) {
  for (auto mode : {Mode::Sound, Mode::Paper}) {
    auto budget = sound_budget(chain2());
    budget.mode = mode;
    for (auto& r : run_model_checks(chain2(), budget)) {
      EXPECT_TRUE(r.passed) << r.check << " " << r.subject << ": " << r.counterexample;
      EXPECT_TRUE(r.exhaustive) << r.subject;
    }
  }
}

TEST(DenModel, Examples) {
  auto nat = Lattice::nat();
  auto deltas = DeltaProfile::defaults(nat);
  DenModel m(nat, deltas);
  Typechecker tc(nat, Mode::Sound, deltas);

  auto tt = Term::tt();
  auto d = interpret_term(tt, tc.synthesize(tt, nat.large()), m);
  EXPECT_EQ(d.cost, nat.bottom());
  EXPECT_TRUE(alpha_eq(m.reify(*d.value), tt));

  auto pair = parse("(tt, ff)", nat);
  auto dp = interpret_term(pair, tc.synthesize(pair, nat.large()), m);
  EXPECT_EQ(dp.cost, nat.bottom());
  EXPECT_TRUE(alpha_eq(m.reify(*dp.value), pair));

  auto ite = parse("if tt then ff else tt", nat);
  auto di = interpret_term(ite, tc.synthesize(ite, nat.large()), m);
  EXPECT_TRUE(alpha_eq(m.reify(*di.value), Term::ff()));
  EXPECT_TRUE(nat.leq(di.cost, nat.natural(1)));
}

TEST(DenModel, ClosuresReifyWithTheirEnvironment) {
  auto nat = Lattice::nat();
  DenModel m(nat, DeltaProfile::defaults(nat));
  auto t = parse("(lam y : Bool . lam x : Bool . if x then y else ff) tt", nat);
  auto d = m.denote(t);
  EXPECT_TRUE(alpha_eq(m.reify(*d.value), parse("lam x : Bool . if x then tt else ff", nat)));
  EXPECT_EQ(d.cost, nat.natural(1));
}

TEST(DenModel, RejectsForeignJudgment) {
  auto nat = Lattice::nat();
  auto deltas = DeltaProfile::defaults(nat);
  Typechecker tc(nat, Mode::Sound, deltas);
  DenModel m(nat, deltas);
  EXPECT_THROW(interpret_term(Term::tt(), tc.synthesize(Term::ff(), nat.large()), m), ModelError);
}

TEST(CostPreservation, SoundModeAndPaperWitness) {
  auto nat = Lattice::nat();
  auto deltas = DeltaProfile::defaults(nat);
  DenModel m(nat, deltas);
  auto witness = parse("(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)", nat);
  std::vector<Term> corpus = {Term::tt(), parse("(3, ff)", nat), parse("unbox (box[5] tt)", nat), witness};

  auto sound = check_cost_preservation(corpus, m, deltas, Mode::Sound);
  EXPECT_TRUE(sound.ok());
  EXPECT_EQ(sound.exact, corpus.size());

  auto paper = check_cost_preservation({witness}, m, deltas, Mode::Paper);
  ASSERT_EQ(paper.failures.size(), 1u);
  EXPECT_TRUE(paper.failures[0].value_agrees);
  EXPECT_FALSE(paper.failures[0].cost_within);
  EXPECT_EQ(paper.failures[0].model_cost, "5");
  EXPECT_EQ(paper.failures[0].bound, "4");
}
