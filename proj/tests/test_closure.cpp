#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtrack/closure.hpp"

#include <random>

using namespace symtrack;

namespace {

// ---- exact-arithmetic oracle ------------------------------------------
// Unpruned level families and ranks over the rationals, computed directly
// from the product recursion. Used to freeze the expected span dimensions
// and verdict levels before trusting the double-precision implementation.

int exact_rank(const std::vector<VecT<Rat>>& vs)
{
    if (vs.empty())
        return 0;
    std::vector<VecT<Rat>> rows = vs;
    const int n = static_cast<int>(rows[0].size());
    int rank = 0;
    for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (!(rows[r](col) == Rat(0))) {
                pivot = r;
                break;
            }
        if (pivot < 0)
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = rank + 1; r < static_cast<int>(rows.size()); ++r) {
            if (rows[r](col) == Rat(0))
                continue;
            const Rat f = rows[r](col) / rows[rank](col);
            for (int c = col; c < n; ++c)
                rows[r](c) -= f * rows[rank](c);
        }
        ++rank;
    }
    return rank;
}

std::vector<VecT<Rat>> exact_z_members(const MechSystemQ& sys, int level)
{
    std::vector<VecT<Rat>> fam;
    for (const auto& y : sys.controls())
        fam.push_back(y);
    const auto is_zero = [](const VecT<Rat>& v) {
        for (int i = 0; i < v.size(); ++i)
            if (!(v(i) == Rat(0)))
                return false;
        return true;
    };
    for (int l = 0; l < level; ++l) {
        std::vector<VecT<Rat>> next = fam;
        const int m = static_cast<int>(fam.size());
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                VecT<Rat> p = sys.symmetric_product(fam[a], fam[b]);
                if (!is_zero(p))
                    next.push_back(std::move(p));
            }
        fam = std::move(next);
    }
    return fam;
}

int exact_lie_rank(const MechSystemQ& sys, const std::vector<VecT<Rat>>& fam)
{
    std::vector<VecT<Rat>> all = fam;
    const auto is_zero = [](const VecT<Rat>& v) {
        for (int i = 0; i < v.size(); ++i)
            if (!(v(i) == Rat(0)))
                return false;
        return true;
    };
    int rank = exact_rank(all);
    bool grew = true;
    while (grew) {
        grew = false;
        const int m = static_cast<int>(all.size());
        for (int a = 0; a < m && !grew; ++a)
            for (int b = a + 1; b < m && !grew; ++b) {
                VecT<Rat> br = sys.algebra().bracket(all[a], all[b]);
                if (is_zero(br))
                    continue;
                std::vector<VecT<Rat>> probe = all;
                probe.push_back(br);
                const int r = exact_rank(probe);
                if (r > rank) {
                    all.push_back(std::move(br));
                    rank = r;
                    grew = true;
                }
            }
    }
    return rank;
}

MechSystemQ submarine_exact_symmetric()
{
    return submarine_system<Rat>(Rat(2), Rat(2), Rat(3), Rat(5), Rat(5), Rat(7));
}

MechSystemQ submarine_exact_asymmetric()
{
    return submarine_system<Rat>(Rat(1), Rat(1), Rat(1), Rat(4), Rat(5), Rat(6));
}

MechSystem submarine_symmetric()
{
    return submarine_system<double>(2, 2, 3, 5, 5, 7);
}

MechSystem submarine_asymmetric()
{
    return submarine_system<double>(1, 1, 1, 4, 5, 6);
}

LieAlgebra abelian(int n)
{
    return LieAlgebra(n, {});
}

LieAlgebra heisenberg4()
{
    // [e1, e2] = e3; e4 central
    return LieAlgebra(4, {{1, 2, 3, 1.0}});
}

LieAlgebra so3_plus_r()
{
    return LieAlgebra(4, {{1, 2, 3, 1.0}, {2, 3, 1, 1.0}, {3, 1, 2, 1.0}});
}

} // namespace

TEST_CASE("exact oracle: submarine span dimensions per level")
{
    const auto sym = submarine_exact_symmetric();
    CHECK(exact_rank(exact_z_members(sym, 0)) == 3);
    CHECK(exact_rank(exact_z_members(sym, 1)) == 5);
    CHECK(exact_rank(exact_z_members(sym, 2)) == 5);
    CHECK(exact_rank(exact_z_members(sym, 3)) == 5);

    const auto asym = submarine_exact_asymmetric();
    CHECK(exact_rank(exact_z_members(asym, 0)) == 3);
    CHECK(exact_rank(exact_z_members(asym, 1)) == 5);
    CHECK(exact_rank(exact_z_members(asym, 2)) == 6); // <e4:e5> hits e3 once M1 != M2
}

TEST_CASE("exact oracle: Lie closure of the control span is already full")
{
    // [Y1,Y2] ~ e3, [Y2,Y3] ~ e4, [Y3,Y1] ~ e5: Lie(Z_0) = se(3).
    const auto sym = submarine_exact_symmetric();
    CHECK(exact_lie_rank(sym, exact_z_members(sym, 0)) == 6);
    CHECK(exact_lie_rank(sym, exact_z_members(sym, 1)) == 6);
}

TEST_CASE("exact oracle: every member's self-product vanishes on the submarine")
{
    for (const auto& sys : {submarine_exact_symmetric(), submarine_exact_asymmetric()}) {
        for (int level = 0; level <= 2; ++level) {
            for (const auto& z : exact_z_members(sys, level)) {
                const VecT<Rat> p = sys.symmetric_product(z, z);
                for (int i = 0; i < 6; ++i)
                    CHECK(p(i) == Rat(0));
            }
        }
    }
}

TEST_CASE("z_family")
{
    const auto sys = submarine_symmetric();

    SUBCASE("level 0 is exactly the control list")
    {
        const FieldFamily fam = z_family(sys, 0);
        REQUIRE(fam.members.size() == 3);
        for (int a = 0; a < 3; ++a) {
            CHECK(fam.members[a] == sys.controls()[a]);
            CHECK(fam.provenance[a].kind == Provenance::Kind::generator);
        }
    }

    SUBCASE("symmetric case, level 1 pruned: {Y1,Y2,Y3, Y4 ~ e5, Y5 ~ e4}")
    {
        const FieldFamily fam = z_family(sys, 1);
        REQUIRE(fam.members.size() == 5);
        // member 4 is <Y1:Y3>, proportional to e5; member 5 is <Y2:Y3> ~ e4
        CHECK(fam.provenance[3].kind == Provenance::Kind::sym_product);
        CHECK(fam.members[3].cwiseAbs().maxCoeff() == std::abs(fam.members[3](4)));
        CHECK(fam.members[3](4) == doctest::Approx(-1.0 / 10.0)); // -1/(J1 M1)
        CHECK(fam.members[4](3) == doctest::Approx(1.0 / 10.0));
        CHECK(span_rank(fam) == 5);
    }

    SUBCASE("level 2 pruned has the same span as level 1")
    {
        CHECK(span_rank(z_family(sys, 2)) == 5);
        CHECK(span_rank(z_family(sys, 3)) == 5);
    }

    SUBCASE("pruned and unpruned spans agree on random 4-dim systems, l <= 3")
    {
        std::mt19937 rng(101);
        std::normal_distribution<double> dist;
        const std::vector<LieAlgebra> algebras = {abelian(4), heisenberg4(), so3_plus_r()};
        for (const auto& g : algebras) {
            for (int trial = 0; trial < 5; ++trial) {
                Mat a(4, 4);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        a(i, j) = dist(rng);
                const Mat spd = a * a.transpose() + 4.0 * Mat::Identity(4, 4);
                std::vector<Vec> controls;
                for (int c = 0; c < 2; ++c) {
                    Vec y(4);
                    for (int i = 0; i < 4; ++i)
                        y(i) = dist(rng);
                    controls.push_back(y);
                }
                const MechSystem sys4(g, InertiaTensor(spd), controls);
                ClosureOptions unpruned;
                unpruned.prune = false;
                for (int l = 0; l <= 3; ++l)
                    CHECK(span_rank(z_family(sys4, l)) ==
                          span_rank(z_family(sys4, l, unpruned)));
            }
        }
    }
}

TEST_CASE("span_rank")
{
    const auto sys = submarine_symmetric();
    CHECK(span_rank(z_family(sys, 0)) == 3);
    CHECK(span_rank(z_family(sys, 1)) == 5);

    FieldFamily empty;
    empty.ambient_dim = 6;
    CHECK(span_rank(empty) == 0);
}

TEST_CASE("condition3_check")
{
    SUBCASE("submarine, both regimes: true at every level")
    {
        for (const auto& sys : {submarine_symmetric(), submarine_asymmetric()}) {
            const auto flags = condition3_check(sys, 3);
            REQUIRE(flags.size() == 3);
            for (bool ok : flags)
                CHECK(ok);
        }
    }

    SUBCASE("single control e1, generic inertia: true at i = 0")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 2, 3, 4, 5, 6;
        MechSystem sys(g, InertiaTensor::diagonal(d), {g.basis_vector(1)});
        const auto flags = condition3_check(sys, 1);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0]);
    }

    SUBCASE("a control whose self-product leaves its own span fails at i = 0")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 1, 1, 4, 5, 6;
        Vec x = g.basis_vector(4) + g.basis_vector(5); // <x:x> ~ e3
        MechSystem sys(g, InertiaTensor::diagonal(d), {x});
        const auto flags = condition3_check(sys, 1);
        REQUIRE(flags.size() == 1);
        CHECK_FALSE(flags[0]);
    }
}

TEST_CASE("lie_closure")
{
    SUBCASE("submarine symmetric Z_1 closes to the full algebra")
    {
        const auto sys = submarine_symmetric();
        const FieldFamily fam = z_family(sys, 1);
        CHECK(span_rank(lie_closure(sys.algebra(), fam, 12)) == 6);
    }

    SUBCASE("the control span alone already closes to the full algebra")
    {
        const auto sys = submarine_symmetric();
        CHECK(span_rank(lie_closure(sys.algebra(), z_family(sys, 0), 12)) == 6);
    }

    SUBCASE("abelian algebra: closure rank equals span rank")
    {
        auto g = abelian(4);
        MechSystem sys(g, InertiaTensor(Mat::Identity(4, 4)),
                       {g.basis_vector(1), g.basis_vector(2) + g.basis_vector(3)});
        const FieldFamily fam = z_family(sys, 0);
        CHECK(span_rank(lie_closure(g, fam, 8)) == span_rank(fam));
    }

    SUBCASE("single member: rank 1")
    {
        auto g = se3();
        FieldFamily fam;
        fam.ambient_dim = 6;
        fam.members.push_back(g.basis_vector(1) + g.basis_vector(4));
        fam.provenance.push_back({Provenance::Kind::generator, 0, -1});
        CHECK(span_rank(lie_closure(g, fam, 12)) == 1);
    }
}

TEST_CASE("sym1")
{
    const auto sys = submarine_symmetric();

    SUBCASE("sym1(Z_{l-1}) spans the same space as Z_l")
    {
        for (int l = 1; l <= 3; ++l) {
            const FieldFamily prev = z_family(sys, l - 1);
            CHECK(span_rank(sym1(sys, prev)) == span_rank(z_family(sys, l)));
        }
    }

    SUBCASE("single field: span{x, <x:x>}")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 1, 1, 4, 5, 6;
        Vec x = g.basis_vector(4) + g.basis_vector(5);
        MechSystem sys2(g, InertiaTensor::diagonal(d), {x});
        const FieldFamily fam = z_family(sys2, 0);
        CHECK(span_rank(sym1(sys2, fam)) == 2);
    }

    SUBCASE("submarine symmetric: sym1 of the controls has dimension 5")
    {
        CHECK(span_rank(sym1(sys, z_family(sys, 0))) == 5);
    }
}

TEST_CASE("is_kinematic_reduction")
{
    SUBCASE("Z_{l-1} reduces Z_l on both regimes, l = 1, 2")
    {
        for (const auto& sys : {submarine_symmetric(), submarine_asymmetric()}) {
            for (int l = 1; l <= 2; ++l) {
                const FieldFamily controls = z_family(sys, l);
                const FieldFamily candidate = z_family(sys, l - 1);
                CHECK(is_kinematic_reduction(sys, controls, candidate));
            }
        }
    }

    SUBCASE("single field with <x:x> outside span{x} is not self-reducing")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 1, 1, 4, 5, 6;
        Vec x = g.basis_vector(4) + g.basis_vector(5);
        MechSystem sys(g, InertiaTensor::diagonal(d), {x});
        const FieldFamily fam = z_family(sys, 0);
        CHECK_FALSE(is_kinematic_reduction(sys, fam, fam));
    }

    SUBCASE("empty candidate reduces vacuously")
    {
        const auto sys = submarine_symmetric();
        FieldFamily empty;
        empty.ambient_dim = 6;
        CHECK(is_kinematic_reduction(sys, z_family(sys, 0), empty));
    }
}

TEST_CASE("analyze_z verdicts")
{
    SUBCASE("symmetric regime: CTP with the documented level facts")
    {
        const auto report = analyze_z(submarine_symmetric(), 3);
        CHECK(report.verdict == Verdict::ctp_by_z);
        REQUIRE(report.witness_level.has_value());
        // Lie(Z_0) is already full (exact oracle above), so the smallest
        // admissible witness is level 1.
        CHECK(*report.witness_level == 1);
        CHECK(report.drift_in_span);
        REQUIRE(report.levels.size() == 4);
        CHECK(report.levels[1].span_dim == 5);
        CHECK(report.levels[1].lie_dim == 6);
        CHECK(report.levels[0].span_dim == 3);
        for (const auto& rec : report.levels)
            CHECK(rec.condition3);
    }

    SUBCASE("asymmetric regime: SCTP at level 2")
    {
        const auto report = analyze_z(submarine_asymmetric(), 3);
        CHECK(report.verdict == Verdict::sctp_by_track_z);
        REQUIRE(report.witness_level.has_value());
        CHECK(*report.witness_level == 2);
        CHECK(report.levels[2].span_dim == 6);
    }

    SUBCASE("zero control field: inconclusive")
    {
        auto g = se3();
        MechSystem sys(g, InertiaTensor(Mat::Identity(6, 6)), {g.zero()});
        const auto report = analyze_z(sys, 3);
        CHECK(report.verdict == Verdict::inconclusive);
        CHECK_FALSE(report.witness_level.has_value());
    }

    SUBCASE("span dims nondecreasing and bounded")
    {
        const auto report = analyze_z(submarine_asymmetric(), 4);
        for (std::size_t i = 1; i < report.levels.size(); ++i) {
            CHECK(report.levels[i].span_dim >= report.levels[i - 1].span_dim);
            CHECK(report.levels[i].span_dim <= 6);
        }
    }
}

TEST_CASE("trackable_curve_z")
{
    SUBCASE("full Lie rank accepts every curve")
    {
        const auto sys = submarine_symmetric();
        const auto report = analyze_z(sys, 3);
        const auto helix = make_helix(1.0, 0.5, 4.0);
        CHECK(trackable_curve_z(sys, *helix, report));
        const auto slew = make_attitude_slew(Eigen::Vector3d(0, 0, 1), 1.0, 2.0);
        CHECK(trackable_curve_z(sys, *slew, report));
    }

    SUBCASE("velocity orthogonal to a rank-deficient closure is rejected")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 1, 1, 4, 4, 4;
        MechSystem sys(g, InertiaTensor::diagonal(d), {g.basis_vector(4)});
        AnalysisReport fake;
        fake.analyzer = "z";
        fake.witness_level = 1;
        // line along +y has body velocity e5, orthogonal to Lie({e4}) = {e4}
        std::vector<Waypoint> pts;
        pts.push_back({0.0, Pose{}});
        Pose end;
        end.r = Eigen::Vector3d(0, 1, 0);
        pts.push_back({1.0, end});
        const auto line_y = make_waypoint_curve(pts);
        CHECK_FALSE(trackable_curve_z(sys, *line_y, fake));
    }

    SUBCASE("missing witness level is rejected")
    {
        const auto sys = submarine_symmetric();
        AnalysisReport fake;
        CHECK_THROWS_AS((void)trackable_curve_z(sys, *make_line(1.0, 1.0), fake),
                        std::invalid_argument);
    }
}
