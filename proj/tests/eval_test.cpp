#include <gtest/gtest.h>

#include "costlam/eval.hpp"
#include "costlam/parse.hpp"

using namespace costlam;

namespace {

const Lattice nat = Lattice::nat();
const DeltaProfile unit = DeltaProfile::defaults(nat);

CostedResult run(std::string_view src) { return eval(nat, parse(src, nat), unit); }

}  // namespace

TEST(Eval, ValueCostsBottom) {
  auto r = run("tt");
  EXPECT_TRUE(alpha_eq(r.value.term(), Term::tt()));
  EXPECT_EQ(r.cost, nat.natural(0));
}

TEST(Eval, Conditional) {
  // IfT: 0 + 0 + d_if
  auto r = run("if tt then ff else tt");
  EXPECT_TRUE(r.value.term().is(Term::Kind::False));
  EXPECT_EQ(r.cost, nat.natural(1));
}

TEST(Eval, Application) {
  // App: 0 + 0 + d_app + (IfT on tt: 1)
  auto r = run("(lam x : Bool . if x then ff else tt) tt");
  EXPECT_TRUE(r.value.term().is(Term::Kind::False));
  EXPECT_EQ(r.cost, nat.natural(2));
}

TEST(Eval, UnboxOfBox) {
  auto r = run("unbox (box[5] tt)");
  EXPECT_TRUE(r.value.term().is(Term::Kind::True));
  EXPECT_EQ(r.cost, nat.natural(1));
}

TEST(Eval, Projection) {
  auto r = run("fst (tt, ff)");
  EXPECT_TRUE(r.value.term().is(Term::Kind::True));
  EXPECT_EQ(r.cost, nat.natural(1));
  EXPECT_EQ(run("snd (3, 4)").value.term().nat_value(), 4u);
}

TEST(Eval, BoxKeepsGrade) {
  auto r = run("box[7] (if tt then ff else tt)");
  ASSERT_TRUE(r.value.term().is(Term::Kind::Box));
  EXPECT_EQ(r.value.term().grade(), nat.natural(7));
  EXPECT_EQ(r.cost, nat.natural(1));
}

TEST(Eval, DoubleApplicationCostsFive) {
  auto r = run("(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)");
  EXPECT_EQ(r.cost, nat.natural(5));
  EXPECT_TRUE(alpha_eq(r.value.term(), Term::pair(Term::ff(), Term::ff())));
}

TEST(Eval, TripleLattice) {
  auto tri = Lattice::triple();
  auto deltas = DeltaProfile::defaults(tri);
  auto r = eval(tri, parse("(lam x : Bool . if x then ff else tt) tt", tri), deltas);
  EXPECT_EQ(r.cost, tri.triple_of(2, 0, 0));
}

TEST(EvalTrace, SingleValue) {
  auto [r, tr] = eval_trace(nat, Term::tt(), unit);
  EXPECT_EQ(tr.rule, "Val");
  EXPECT_TRUE(tr.children.empty());
  EXPECT_EQ(tr.contribution, nat.bottom());
}

TEST(EvalTrace, PairOfValues) {
  auto [r, tr] = eval_trace(nat, parse("(tt, ff)", nat), unit);
  EXPECT_EQ(tr.rule, "Pair");
  ASSERT_EQ(tr.children.size(), 2u);
  EXPECT_EQ(tr.children[0].rule, "Val");
  EXPECT_EQ(tr.children[1].rule, "Val");
  EXPECT_EQ(r.cost, nat.bottom());
}

TEST(EvalTrace, ApplicationShape) {
  auto [r, tr] = eval_trace(nat, parse("(lam x : Bool . if x then ff else tt) tt", nat), unit);
  EXPECT_EQ(tr.rule, "App");
  EXPECT_EQ(tr.contribution, nat.natural(1));
  ASSERT_EQ(tr.children.size(), 3u);
  EXPECT_EQ(tr.children[0].rule, "Val");
  EXPECT_EQ(tr.children[1].rule, "Val");
  const auto& body = tr.children[2];
  EXPECT_EQ(body.rule, "IfT");
  EXPECT_EQ(body.contribution, nat.natural(1));
  ASSERT_EQ(body.children.size(), 2u);
  EXPECT_EQ(body.children[0].contribution, nat.bottom());
  EXPECT_EQ(body.children[1].contribution, nat.bottom());
  EXPECT_EQ(fold_contributions(nat, tr), r.cost);
}

TEST(Eval, StuckOnIllTypedInput) {
  EXPECT_THROW(run("fst tt"), Stuck);
  EXPECT_THROW(run("unbox ff"), Stuck);
  EXPECT_THROW(run("if 3 then tt else ff"), Stuck);
  EXPECT_THROW(run("tt tt"), Stuck);
  EXPECT_THROW(run("x"), Stuck);
}

TEST(Eval, FuelGuard) {
  auto t = parse("(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)", nat);
  EXPECT_THROW(eval(nat, t, unit, 5), FuelExhausted);
  EXPECT_NO_THROW(eval(nat, t, unit, 100));
}

TEST(Eval, DeterministicAcrossRenaming) {
  auto t = parse("(lam f : Bool -> Bool . lam y : Bool . f (f y)) (lam x : Bool . if x then ff else tt)", nat);
  std::size_t counter = 0;
  auto renamed = rename_binders(t, counter);
  auto a = eval(nat, t, unit);
  auto b = eval(nat, renamed, unit);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_TRUE(alpha_eq(a.value.term(), b.value.term()));
}
