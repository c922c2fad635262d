#include <gtest/gtest.h>

#include "costlam/harness.hpp"
#include "costlam/parse.hpp"

using namespace costlam;

namespace {

const Lattice nat = Lattice::nat();

constexpr const char* kDoubleApply =
    "(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)";

Typechecker checker(Mode mode, bool trace = false) { return Typechecker(nat, mode, DeltaProfile::defaults(nat), trace); }

bool violates(const Term& t, Mode mode) {
  auto tc = checker(mode);
  Evaluator ev(nat, DeltaProfile::defaults(nat));
  try {
    auto j = tc.synthesize(t, nat.large());
    return !nat.leq(ev.eval(t).cost, j.bound);
  } catch (const std::exception&) {
    return false;
  }
}

SuiteConfig small_suite(Mode mode, std::size_t count) {
  SuiteConfig cfg;
  cfg.gen.mode = mode;
  cfg.gen.count = count;
  return cfg;
}

}  // namespace

TEST(Generator, DepthZeroBoolIsConstant) {
  GenConfig cfg;
  auto tc = checker(Mode::Sound);
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rng = trial_engine(7, i);
    auto t = gen_typed_term(cfg, tc, Context{}, Type::boolean(), rng, 0);
    EXPECT_TRUE(alpha_eq(t, Term::tt()) || alpha_eq(t, Term::ff())) << format(t, nat);
  }
}

TEST(Generator, BoxGoalMeetsGrade) {
  GenConfig cfg;
  auto tc = checker(Mode::Sound);
  auto goal = Type::box(nat.natural(2), Type::boolean());
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto rng = trial_engine(11, i);
    auto t = gen_typed_term(cfg, tc, Context{}, goal, rng, 4);
    EXPECT_TRUE(tc.is_subtype(tc.synthesize(t, nat.large()).type, goal))
        << format(t, nat) << " : " << format(tc.synthesize(t, nat.large()).type, nat);
    std::vector<Term> nodes;
    detail::preorder(t, nodes);
    for (auto& n : nodes) {
      if (!n.is(Term::Kind::Box) || !is_closed(n)) continue;
      auto body = tc.synthesize(n.children()[0], nat.large());
      EXPECT_TRUE(nat.leq(body.bound, n.grade())) << format(n, nat);
    }
  }
}

TEST(Generator, AllTermsTypecheck) {
  for (auto mode : {Mode::Sound, Mode::Paper}) {
    GenConfig cfg;
    cfg.mode = mode;
    cfg.max_depth = 5;
    auto tc = checker(mode);
    std::size_t ok = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      auto rng = trial_engine(cfg.seed, i);
      try {
        tc.synthesize(trial_term(cfg, tc, rng), nat.large());
        ++ok;
      } catch (const TypeError& e) {
        ADD_FAILURE() << "trial " << i << ": " << e.what();
      }
    }
    EXPECT_EQ(ok, 1000u);
  }
}

TEST(Generator, PrintParseRoundTrip) {
  for (auto lat : {nat, Lattice::triple(), chain2()}) {
    GenConfig cfg;
    cfg.count = 500;
    for (auto& t : generate_corpus(cfg, lat, DeltaProfile::defaults(lat)))
      EXPECT_TRUE(alpha_eq(parse(format(t, lat), lat), t)) << format(t, lat);
  }
}

TEST(Generator, PureFunctionOfConfig) {
  GenConfig cfg;
  cfg.count = 200;
  auto a = generate_corpus(cfg, nat, DeltaProfile::defaults(nat));
  auto b = generate_corpus(cfg, nat, DeltaProfile::defaults(nat));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(format(a[i], nat), format(b[i], nat));
}

TEST(Generator, NoReuseAppliesFunctionVariablesOnce) {
  auto cfg = paper_hunter_config(42, false);
  cfg.count = 2000;
  for (auto& t : generate_corpus(cfg, nat, DeltaProfile::defaults(nat))) {
    std::map<std::string, int> applied;
    std::vector<Term> nodes;
    detail::preorder(t, nodes);
    for (auto& n : nodes)
      if (n.is(Term::Kind::App) && n.children()[0].is(Term::Kind::Var)) ++applied[n.children()[0].name()];
    for (auto& [f, c] : applied) EXPECT_LE(c, 1) << f << " in " << format(t, nat);
  }
}

TEST(Minimizer, CanonicalWitnessIsFixpoint) {
  auto t = parse(kDoubleApply, nat);
  auto fails = [](const Term& c) { return violates(c, Mode::Paper); };
  ASSERT_TRUE(fails(t));
  EXPECT_TRUE(alpha_eq(minimize(t, fails, checker(Mode::Paper, true)), t));
}

TEST(Minimizer, ShrinksToCanonical) {
  auto t = parse(
      "(lam g : Bool -> Bool . (lam h : Bool -> Bool . (g tt, g (if tt then tt else ff))) (lam y : Bool . y))"
      " (lam x : Bool . if x then ff else tt)",
      nat);
  auto fails = [](const Term& c) { return violates(c, Mode::Paper); };
  ASSERT_TRUE(fails(t));
  auto m = minimize(t, fails, checker(Mode::Paper, true));
  EXPECT_TRUE(alpha_eq(m, parse(kDoubleApply, nat))) << format(m, nat);
}

TEST(Minimizer, OutputStillFails) {
  SuiteConfig cfg;
  cfg.gen = paper_hunter_config();
  cfg.gen.count = 3000;
  cfg.jobs = 4;
  auto rep = prop_cost_soundness(cfg);
  ASSERT_FALSE(rep.failures.empty());
  for (auto& f : rep.failures) {
    auto m = parse(f.minimized, nat);
    EXPECT_TRUE(violates(m, Mode::Paper)) << f.minimized;
    EXPECT_LE(m.size(), parse(f.term, nat).size());
  }
}

TEST(Properties, SoundModeClean) {
  for (auto& name : property_names()) {
    auto cfg = small_suite(Mode::Sound, 1500);
    cfg.jobs = 4;
    auto rep = run_named_property(name, cfg);
    EXPECT_EQ(rep.failure_count, 0u) << name << ": "
                                     << (rep.failures.empty() ? "" : rep.failures[0].term + " " + rep.failures[0].relation);
    EXPECT_EQ(rep.trials, 1500u);
  }
}

TEST(Properties, ReportsIndependentOfJobs) {
  auto one = small_suite(Mode::Paper, 2000);
  one.gen = paper_hunter_config();
  one.gen.count = 2000;
  auto many = one;
  many.jobs = 6;
  auto a = prop_cost_soundness(one);
  auto b = prop_cost_soundness(many);
  ASSERT_EQ(a.failure_count, b.failure_count);
  ASSERT_EQ(a.failures.size(), b.failures.size());
  for (std::size_t i = 0; i < a.failures.size(); ++i) {
    EXPECT_EQ(a.failures[i].trial, b.failures[i].trial);
    EXPECT_EQ(a.failures[i].minimized, b.failures[i].minimized);
  }
}

TEST(Properties, PaperModeNoReuseClean) {
  SuiteConfig cfg;
  cfg.gen = paper_hunter_config(42, false);
  cfg.gen.count = 5000;
  cfg.jobs = 4;
  auto rep = prop_cost_soundness(cfg);
  EXPECT_EQ(rep.failure_count, 0u);
  EXPECT_TRUE(rep.ok());
}

TEST(Properties, PaperModeReuseFails) {
  SuiteConfig cfg;
  cfg.gen = paper_hunter_config();
  cfg.gen.count = 5000;
  cfg.jobs = 4;
  auto rep = prop_cost_soundness(cfg);
  EXPECT_GT(rep.failure_count, 0u);
  EXPECT_FALSE(rep.expected_clean);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.failures[0].relation, "k <= b");
}

TEST(Properties, CounitArithmetic) {
  auto tc = checker(Mode::Sound);
  auto j = tc.synthesize(parse("unbox (box[5] tt)", nat), nat.large());
  EXPECT_EQ(j.type, Type::boolean());
  EXPECT_EQ(j.bound, nat.natural(1));
}

TEST(Properties, SubstitutingIntoVariable) {
  auto tc = checker(Mode::Sound);
  Context ctx;
  ctx = ctx.extend("x", Type::boolean());
  auto open = tc.synthesize(ctx, Term::var("x"), nat.large());
  auto closed = tc.synthesize(substitute(Term::var("x"), "x", Term::ff()), nat.large());
  EXPECT_EQ(open.bound, nat.bottom());
  EXPECT_EQ(closed.bound, nat.bottom());
  EXPECT_EQ(open.type, closed.type);
}

TEST(SampleElement, StaysInCarrier) {
  auto sat = Lattice::saturating(3);
  auto rng = trial_engine(1, 1);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sat.leq(sample_element(sat, rng), sat.natural(3)));
}
