#include <gtest/gtest.h>

#include "costlam/lattice.hpp"

using namespace costlam;

namespace {

// 0 < a < b with a deliberately non-associative combine:
// (a+a)+b = b+b = a, but a+(a+b) = a+b = b.
const char* kBrokenTable = R"(
name: broken
elements: 0 a b
bottom: 0
leq:
  0 a
  0 b
  a b
combine:
  0 0 -> 0
  0 a -> a
  0 b -> b
  a a -> b
  a b -> b
  b b -> a
)";

std::vector<Element> nat_range(const Lattice& lat, std::uint64_t lo, std::uint64_t hi) {
  std::vector<Element> out;
  for (auto i = lo; i <= hi; ++i) out.push_back(lat.natural(i));
  return out;
}

}  // namespace

TEST(Lattice, NaturalOrderAndOps) {
  auto nat = Lattice::nat();
  EXPECT_TRUE(nat.leq(nat.natural(2), nat.natural(5)));
  EXPECT_FALSE(nat.leq(nat.natural(5), nat.natural(2)));
  EXPECT_EQ(nat.combine(nat.natural(7), nat.bottom()), nat.natural(7));
  EXPECT_EQ(nat.join(nat.natural(5), nat.natural(5)), nat.natural(5));
  EXPECT_EQ(nat.join(nat.natural(2), nat.natural(9)), nat.natural(9));
  EXPECT_EQ(nat.bottom(), nat.natural(0));
}

TEST(Lattice, TriplePointwise) {
  auto tri = Lattice::triple();
  EXPECT_TRUE(tri.leq(tri.triple_of(1, 2, 0), tri.triple_of(1, 2, 0)));
  EXPECT_FALSE(tri.leq(tri.triple_of(2, 0, 0), tri.triple_of(1, 5, 5)));
  EXPECT_EQ(tri.combine(tri.triple_of(1, 2, 0), tri.triple_of(3, 0, 4)), tri.triple_of(4, 2, 4));
  EXPECT_EQ(tri.join(tri.triple_of(1, 2, 0), tri.triple_of(3, 0, 4)), tri.triple_of(3, 2, 4));
  EXPECT_EQ(tri.bottom(), tri.triple_of(0, 0, 0));
  EXPECT_EQ(tri.unit_step(), tri.triple_of(1, 0, 0));
}

TEST(Lattice, SaturatingClamps) {
  auto sat = Lattice::saturating(10);
  EXPECT_EQ(sat.combine(sat.natural(7), sat.natural(6)), sat.natural(10));
  EXPECT_THROW(sat.natural(11), LatticeError);
  EXPECT_EQ(sat.elements().size(), 11u);
}

TEST(Lattice, ProductBottomAndFormat) {
  auto p = Lattice::product({Lattice::nat(), Lattice::triple()});
  EXPECT_EQ(p.format(p.bottom()), "(0,(0,0,0))");
  auto e = p.parse_literal("(2, (1,0,3))");
  auto parts = p.split(e);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], Lattice::nat().natural(2));
  EXPECT_EQ(parts[1], Lattice::triple().triple_of(1, 0, 3));
  EXPECT_EQ(p.combine(e, e), p.parse_literal("(4,(2,0,6))"));
}

TEST(Lattice, InstanceMismatchNamesBoth) {
  auto nat = Lattice::nat();
  auto gas = Lattice::gas();
  try {
    (void)nat.leq(nat.natural(1), gas.natural(1));
    FAIL() << "expected LatticeMismatch";
  } catch (const LatticeMismatch& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("gas"), std::string::npos);
    EXPECT_NE(msg.find("nat"), std::string::npos);
  }
}

TEST(Lattice, SameDescriptionSameInstance) {
  auto a = parse_lattice_spec("sat(4)");
  auto b = Lattice::saturating(4);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.leq(b.natural(1), a.natural(2)));
}

TEST(Lattice, LiteralRoundTrip) {
  for (auto spec : {"nat", "triple", "sat(7)", "chain2", "prod(nat,prod(chain2,triple))"}) {
    auto lat = parse_lattice_spec(spec);
    auto e = lat.unit_step();
    EXPECT_EQ(lat.parse_literal(lat.format(e)), e) << spec;
  }
  EXPECT_THROW(Lattice::nat().parse_literal("x"), LatticeError);
  EXPECT_THROW(Lattice::triple().parse_literal("(1,2)"), LatticeError);
}

TEST(Laws, Chain2PassesExhaustively) {
  auto r = check_laws(chain2());
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.sample_size, 2u);
}

TEST(Laws, NatSamplePasses) {
  auto nat = Lattice::nat();
  auto r = check_laws(nat, nat_range(nat, 0, 20));
  EXPECT_TRUE(r.passed());
}

TEST(Laws, SaturatingUpToTwelveIsLawful) {
  for (std::uint64_t cap = 0; cap <= 12; ++cap) EXPECT_TRUE(check_laws(Lattice::saturating(cap)).passed()) << cap;
}

TEST(Laws, ProductOfLawfulIsLawful) {
  auto p = Lattice::product({Lattice::saturating(2), chain2()});
  EXPECT_TRUE(check_laws(p).passed());
}

TEST(Laws, BrokenTableFlagsAssociativity) {
  auto lat = parse_lattice_table(kBrokenTable);
  auto r = check_laws(lat);
  EXPECT_FALSE(r.passed());
  auto* assoc = r.find("combine-associative");
  ASSERT_NE(assoc, nullptr);
  ASSERT_FALSE(assoc->passed);
  ASSERT_EQ(assoc->witness.size(), 3u);
  const auto& w = assoc->witness;
  EXPECT_NE(lat.combine(lat.combine(w[0], w[1]), w[2]), lat.combine(w[0], lat.combine(w[1], w[2])));
  EXPECT_TRUE(r.find("combine-commutative")->passed);
}

TEST(LatticeFile, JoinDerivedFromOrder) {
  auto lat = parse_lattice_table(R"(
    elements: bot a b top
    bottom: bot
    leq:
      bot a
      bot b
      bot top
      a top
      b top
    combine:
      bot bot -> bot
      bot a -> a
      bot b -> b
      bot top -> top
      a a -> a
      a b -> top
      a top -> top
      b b -> b
      b top -> top
      top top -> top
  )",
                                 "diamond");
  EXPECT_EQ(lat.name(), "diamond");
  EXPECT_EQ(lat.join(lat.finite_element("a"), lat.finite_element("b")), lat.finite_element("top"));
  EXPECT_EQ(lat.large(), lat.finite_element("top"));
  EXPECT_TRUE(check_laws(lat).passed());
}

TEST(LatticeFile, MissingJoinIsNotASemilattice) {
  // a and b have no upper bound at all.
  try {
    parse_lattice_table(R"(
      elements: bot a b
      bottom: bot
      leq:
        bot a
        bot b
      combine:
        bot bot -> bot
        bot a -> a
        bot b -> b
        a a -> a
        a b -> a
        b b -> b
    )");
    FAIL();
  } catch (const LatticeError& e) {
    EXPECT_NE(std::string(e.what()).find("not a join-semilattice"), std::string::npos);
  }
}

TEST(LatticeFile, CombineMustBeTotal) {
  EXPECT_THROW(parse_lattice_table("elements: x y\nbottom: x\nleq:\n x y\ncombine:\n x x -> x\n"), LatticeError);
}
