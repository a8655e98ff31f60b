#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtrack/nnls.hpp"
#include "symtrack/poly_cone.hpp"

#include <random>

using namespace symtrack;

namespace {

Vec random_vec(std::mt19937& rng, int n)
{
    std::normal_distribution<double> dist;
    Vec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = dist(rng);
    return v;
}

// Brute-force NNLS oracle: the optimum is the best feasible unconstrained
// least-squares solution over all column subsets.
double nnls_bruteforce_residual(const Mat& a, const Vec& b)
{
    const int n = static_cast<int>(a.cols());
    double best = b.norm(); // empty subset
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i))
                idx.push_back(i);
        Mat sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c)
            sub.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
        const Vec x = sub.colPivHouseholderQr().solve(b);
        if ((x.array() >= -1e-9).all())
            best = std::min(best, (sub * x - b).norm());
    }
    return best;
}

MechSystem submarine_symmetric()
{
    return submarine_system<double>(2, 2, 3, 5, 5, 7);
}

MechSystem submarine_asymmetric()
{
    return submarine_system<double>(1, 1, 1, 4, 5, 6);
}

PolyCone span_cone(const std::vector<Vec>& dirs, int dim, bool with_negations)
{
    PolyCone c;
    c.ambient_dim = dim;
    for (const Vec& d : dirs) {
        c.rays.push_back(d);
        c.origins.push_back({RayOrigin::Kind::base, Vec()});
        if (with_negations) {
            c.rays.push_back(-d);
            c.origins.push_back({RayOrigin::Kind::base, Vec()});
        }
    }
    return c;
}

} // namespace

TEST_CASE("nnls matches the subset-enumeration oracle")
{
    std::mt19937 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        Mat a(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 3; ++j)
                a(i, j) = std::normal_distribution<double>()(rng);
        const Vec b = random_vec(rng, 4);
        const auto result = nnls(a, b);
        CHECK((result.x.array() >= 0.0).all());
        CHECK(result.residual ==
              doctest::Approx(nnls_bruteforce_residual(a, b)).epsilon(1e-8));
    }
}

TEST_CASE("nnls recovers exact conic combinations")
{
    std::mt19937 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        Mat a(6, 4);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 4; ++j)
                a(i, j) = std::normal_distribution<double>()(rng);
        Vec coeff(4);
        for (int j = 0; j < 4; ++j)
            coeff(j) = std::abs(std::normal_distribution<double>()(rng));
        const Vec b = a * coeff;
        CHECK(nnls(a, b).residual <= 1e-10 * std::max(1.0, b.norm()));
    }
}

TEST_CASE("cone_member basics")
{
    const auto sys = submarine_symmetric();
    const auto& g = sys.algebra();

    SUBCASE("zero vector belongs to every cone")
    {
        const PolyCone c = span_cone({g.basis_vector(1)}, 6, false);
        CHECK(cone_member(c, g.zero(), 1e-10));
    }

    SUBCASE("lineality members come in opposite pairs")
    {
        PolyCone c = span_cone({}, 6, false);
        c.lineality.push_back(g.basis_vector(2));
        std::mt19937 rng(3);
        const Vec v = g.basis_vector(2) * std::normal_distribution<double>()(rng);
        CHECK(cone_member(c, v, 1e-10));
        CHECK(cone_member(c, Vec(-v), 1e-10));
    }

    SUBCASE("single-ray cone rejects the opposite direction")
    {
        const PolyCone c = span_cone({g.basis_vector(1)}, 6, false);
        CHECK(cone_member(c, g.basis_vector(1) * 3.0, 1e-10));
        CHECK_FALSE(cone_member(c, Vec(-g.basis_vector(1)), 1e-8));
        CHECK_FALSE(cone_member(c, g.basis_vector(2), 1e-8));
    }

    SUBCASE("submarine symmetric level-1 cone contains +-e4 and +-e5")
    {
        const PolyCone c = k_cone(sys, 1, 64);
        for (int i : {4, 5}) {
            CHECK(cone_member(c, g.basis_vector(i), 1e-8));
            CHECK(cone_member(c, Vec(-g.basis_vector(i)), 1e-8));
        }
    }
}

TEST_CASE("lineality_of")
{
    const auto g = se3();

    SUBCASE("a line stored as two opposite rays")
    {
        const PolyCone c = span_cone({g.basis_vector(1)}, 6, true);
        CHECK(lineality_of(c).size() == 1);
    }

    SUBCASE("a single ray has trivial lineality")
    {
        const PolyCone c = span_cone({g.basis_vector(1)}, 6, false);
        CHECK(lineality_of(c).empty());
    }

    SUBCASE("submarine symmetric level 1: dimension 5 spanning {e1,e2,e4,e5,e6}")
    {
        const auto sys = submarine_symmetric();
        const PolyCone c = k_cone(sys, 1, 64);
        REQUIRE(c.lineality.size() == 5);
        Mat lin = c.lineality_matrix();
        const Mat proj = lin * lin.transpose();
        for (int i : {1, 2, 4, 5, 6})
            CHECK((proj * g.basis_vector(i) - g.basis_vector(i)).norm() <= 1e-8);
        CHECK((proj * g.basis_vector(3)).norm() <= 1e-8);
    }
}

TEST_CASE("k_cone levels")
{
    const auto sys = submarine_symmetric();

    SUBCASE("level 0 lineality is the control span")
    {
        const PolyCone c = k_cone(sys, 0, 1);
        REQUIRE(c.lineality.size() == 3);
        Mat lin = c.lineality_matrix();
        const Mat proj = lin * lin.transpose();
        for (int i : {1, 2, 6})
            CHECK((proj * sys.algebra().basis_vector(i) - sys.algebra().basis_vector(i)).norm() <=
                  1e-10);
    }

    SUBCASE("level 1 lineality reaches dimension 5 with enough samples")
    {
        CHECK(k_cone(sys, 1, 20).lineality.size() == 5);
    }

    SUBCASE("vanishing products leave the cone at its previous level")
    {
        auto g = se3();
        Vec d(6);
        d << 1, 2, 3, 4, 5, 6;
        MechSystem single(g, InertiaTensor::diagonal(d), {g.basis_vector(1)});
        const PolyCone c0 = k_cone(single, 0, 16);
        const PolyCone c1 = k_cone(single, 1, 16);
        CHECK(c0.rays.size() == c1.rays.size());
        CHECK(c1.lineality.size() == c0.lineality.size());
    }
}

TEST_CASE("inner-approximation soundness: sampled rays reconstruct exactly")
{
    const auto sys = submarine_asymmetric();
    for (int level : {1, 2}) {
        const PolyCone prev = k_cone(sys, level - 1, 40);
        const PolyCone c = k_cone(sys, level, 40);
        Mat lin = prev.lineality_matrix();
        int checked = 0;
        for (std::size_t i = 0; i < c.rays.size() && checked < 20; ++i) {
            if (c.origins[i].kind != RayOrigin::Kind::sampled)
                continue;
            const Vec& z = c.origins[i].sample;
            // ray = -<Z:Z> with Z on the unit sphere of some level's lineality
            CHECK((c.rays[i] + sys.symmetric_product(z, z)).norm() <= 1e-10);
            CHECK(z.norm() == doctest::Approx(1.0).epsilon(1e-10));
            if (level == 1) {
                // for the first level the sample must lie in the level-0 lineality
                CHECK((lin * (lin.transpose() * z) - z).norm() <= 1e-10);
            }
            ++checked;
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("lineality dimension is nondecreasing in the sample count")
{
    for (const auto& sys : {submarine_symmetric(), submarine_asymmetric()}) {
        for (int level : {1, 2}) {
            int prev_dim = 0;
            for (int samples : {8, 20, 50, 200}) {
                const int dim = static_cast<int>(k_cone(sys, level, samples).lineality.size());
                CHECK(dim >= prev_dim);
                prev_dim = dim;
            }
        }
    }
}

TEST_CASE("cone lineality matches the symmetric-product spans, both regimes")
{
    for (const auto& sys : {submarine_symmetric(), submarine_asymmetric()}) {
        for (int level = 0; level <= 2; ++level) {
            const PolyCone c = k_cone(sys, level, 200);
            const FieldFamily fam = z_family(sys, level);
            CHECK(static_cast<int>(c.lineality.size()) == span_rank(fam));
            // subspace equality: every family member in the lineality and back
            Mat lin = c.lineality_matrix();
            const Mat proj = lin * lin.transpose();
            for (const Vec& m : fam.members)
                CHECK((proj * m - m).norm() <= 1e-8 * std::max(1.0, m.norm()));
            const Mat basis = fam.matrix();
            for (const Vec& q : c.lineality)
                CHECK(in_span(basis, q, 1e-8));
        }
    }
}

TEST_CASE("analyze_k")
{
    SUBCASE("submarine symmetric: CTP via the cone route")
    {
        const auto report = analyze_k(submarine_symmetric(), 2, 100);
        CHECK(report.verdict == Verdict::ctp_by_k);
        REQUIRE(report.witness_level.has_value());
        CHECK(*report.witness_level == 1); // Lie of the level-0 lineality is full
        REQUIRE(report.cone_levels.size() == 3);
        CHECK(report.cone_levels[1].lineality_dim == 5);
        CHECK(report.cone_levels[1].is_subspace);
        CHECK(report.cone_levels[1].samples == 100);
    }

    SUBCASE("agreement with the symmetric-product analyzer")
    {
        for (const auto& sys : {submarine_symmetric(), submarine_asymmetric()}) {
            const auto zk = analyze_z(sys, 2);
            const auto kk = analyze_k(sys, 2, 100);
            CHECK(zk.positive() == kk.positive());
        }
    }

    SUBCASE("zero control field: inconclusive")
    {
        auto g = se3();
        MechSystem sys(g, InertiaTensor(Mat::Identity(6, 6)), {g.zero()});
        const auto report = analyze_k(sys, 2, 16);
        CHECK(report.verdict == Verdict::inconclusive);
    }

    SUBCASE("all six directions controlled: CTP at level 1")
    {
        auto g = se3();
        std::vector<Vec> controls;
        for (int i = 1; i <= 6; ++i)
            controls.push_back(g.basis_vector(i));
        Vec d(6);
        d << 1, 2, 3, 4, 5, 6;
        MechSystem sys(g, InertiaTensor::diagonal(d), controls);
        const auto report = analyze_k(sys, 2, 32);
        CHECK(report.verdict == Verdict::ctp_by_k);
        CHECK(*report.witness_level == 1);
    }
}

TEST_CASE("sphere samples are deterministic and prefix-stable")
{
    const Mat a = sphere_samples(5, 50, 1);
    const Mat b = sphere_samples(5, 100, 1);
    CHECK((a - b.leftCols(50)).norm() == 0.0);
    for (int c = 0; c < 50; ++c)
        CHECK(a.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
}
