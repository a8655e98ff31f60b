#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtrack/mech_system.hpp"

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

MechSystem submarine_double(double j1, double j2, double j3, double m1, double m2, double m3)
{
    return submarine_system<double>(j1, j2, j3, m1, m2, m3);
}

} // namespace

TEST_CASE("symmetric-case products match the reference values exactly")
{
    // J1 = J2 = 2, M1 = M2 = 5
    const auto sys = submarine_system<Rat>(Rat(2), Rat(2), Rat(3), Rat(5), Rat(5), Rat(7));
    const auto& g = sys.algebra();
    const auto y1 = sys.controls()[0];
    const auto y2 = sys.controls()[1];
    const auto y3 = sys.controls()[2];

    SUBCASE("<Y1 : Y2> = 0")
    {
        const VecT<Rat> p = sys.symmetric_product(y1, y2);
        for (int i = 0; i < 6; ++i)
            CHECK(p(i) == Rat(0));
    }

    SUBCASE("<Y1 : Y3> = -e5 / (J1 M1)")
    {
        const VecT<Rat> p = sys.symmetric_product(y1, y3);
        CHECK(p(4) == Rat(-1, 10));
        for (int i : {0, 1, 2, 3, 5})
            CHECK(p(i) == Rat(0));
    }

    SUBCASE("<Y2 : Y3> = e4 / (J1 M1)")
    {
        const VecT<Rat> p = sys.symmetric_product(y2, y3);
        CHECK(p(3) == Rat(1, 10));
        for (int i : {0, 1, 2, 4, 5})
            CHECK(p(i) == Rat(0));
    }

    SUBCASE("<e_j : e_j> = 0 for j = 1..6")
    {
        for (int j = 1; j <= 6; ++j) {
            const VecT<Rat> p = sys.symmetric_product(g.basis_vector(j), g.basis_vector(j));
            for (int i = 0; i < 6; ++i)
                CHECK(p(i) == Rat(0));
        }
    }

    SUBCASE("[Y1, Y2] = e3 / J1^2")
    {
        const VecT<Rat> b = g.bracket(y1, y2);
        CHECK(b(2) == Rat(1, 4));
        for (int i : {0, 1, 3, 4, 5})
            CHECK(b(i) == Rat(0));
    }
}

TEST_CASE("gamma table at M = diag(1,2,3,4,5,6), exact")
{
    const auto sys = submarine_system<Rat>(Rat(1), Rat(2), Rat(3), Rat(4), Rat(5), Rat(6));
    const auto gamma = sys.gamma_constants();

    // (J3-J2)/J1, (M3-M2)/J1
    CHECK(gamma.gamma(3, 2, 1) == Rat(1));
    CHECK(gamma.gamma(2, 3, 1) == Rat(1));
    CHECK(gamma.gamma(5, 6, 1) == Rat(1));
    // (J1-J3)/J2, (M1-M3)/J2
    CHECK(gamma.gamma(3, 1, 2) == Rat(-1));
    CHECK(gamma.gamma(4, 6, 2) == Rat(-1));
    // (J2-J1)/J3, (M2-M1)/J3
    CHECK(gamma.gamma(2, 1, 3) == Rat(1, 3));
    CHECK(gamma.gamma(4, 5, 3) == Rat(1, 3));
    // M3/M1, -M2/M1
    CHECK(gamma.gamma(2, 6, 4) == Rat(3, 2));
    CHECK(gamma.gamma(6, 2, 4) == Rat(3, 2));
    CHECK(gamma.gamma(3, 5, 4) == Rat(-5, 4));
    // -M3/M2, M1/M2
    CHECK(gamma.gamma(1, 6, 5) == Rat(-6, 5));
    CHECK(gamma.gamma(3, 4, 5) == Rat(4, 5));
    // M2/M3, -M1/M3
    CHECK(gamma.gamma(1, 5, 6) == Rat(5, 6));
    CHECK(gamma.gamma(2, 4, 6) == Rat(-2, 3));

    // exactly 24 nonzero entries counting both orientations
    int nonzero = 0;
    for (int i = 1; i <= 6; ++i)
        for (int j = 1; j <= 6; ++j)
            for (int k = 1; k <= 6; ++k)
                if (!(gamma.gamma(i, j, k) == Rat(0)))
                    ++nonzero;
    CHECK(nonzero == 24);
}

TEST_CASE("gamma_constants agrees with symmetric_product on basis pairs")
{
    SUBCASE("exact, generic diagonal inertia")
    {
        const auto sys = submarine_system<Rat>(Rat(1), Rat(2), Rat(3), Rat(4), Rat(5), Rat(6));
        const auto gamma = sys.gamma_constants();
        const auto& g = sys.algebra();
        for (int i = 1; i <= 6; ++i)
            for (int j = 1; j <= 6; ++j) {
                const VecT<Rat> p = sys.symmetric_product(g.basis_vector(i), g.basis_vector(j));
                for (int k = 1; k <= 6; ++k)
                    CHECK(p(k - 1) == gamma.gamma(i, j, k));
            }
    }

    SUBCASE("double, dense SPD inertia")
    {
        std::mt19937 rng(11);
        Mat a(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                a(i, j) = std::normal_distribution<double>()(rng);
        const Mat spd = a * a.transpose() + 6.0 * Mat::Identity(6, 6);
        MechSystem sys(se3(), InertiaTensor(spd), {se3().basis_vector(1)});
        const auto gamma = sys.gamma_constants();
        const auto& g = sys.algebra();
        for (int i = 1; i <= 6; ++i)
            for (int j = i; j <= 6; ++j) {
                const Vec p = sys.symmetric_product(g.basis_vector(i), g.basis_vector(j));
                for (int k = 1; k <= 6; ++k)
                    CHECK(p(k - 1) == doctest::Approx(gamma.gamma(i, j, k)).epsilon(1e-12));
            }
    }
}

TEST_CASE("symmetric product identities")
{
    const auto sys = submarine_double(1, 2, 3, 4, 5, 6);
    std::mt19937 rng(17);

    SUBCASE("exact symmetry")
    {
        for (int trial = 0; trial < 50; ++trial) {
            const Vec x = random_vec(rng, 6);
            const Vec y = random_vec(rng, 6);
            const Vec pxy = sys.symmetric_product(x, y);
            const Vec pyx = sys.symmetric_product(y, x);
            CHECK(pxy == pyx);
        }
    }

    SUBCASE("polarization")
    {
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_vec(rng, 6);
            const Vec y = random_vec(rng, 6);
            const Vec lhs = sys.symmetric_product(x, y);
            const Vec rhs = 0.5 * (sys.symmetric_product(x + y, x + y) -
                                   sys.symmetric_product(x, x) - sys.symmetric_product(y, y));
            CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    SUBCASE("constant scaling: <a x : a x> = a^2 <x : x>")
    {
        for (int trial = 0; trial < 50; ++trial) {
            const Vec x = random_vec(rng, 6);
            const double a = std::normal_distribution<double>()(rng);
            const Vec lhs = sys.symmetric_product(a * x, a * x);
            const Vec rhs = a * a * sys.symmetric_product(x, x);
            CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    SUBCASE("dimension mismatch rejected")
    {
        Vec bad(5);
        bad.setZero();
        CHECK_THROWS_AS((void)sys.symmetric_product(bad, bad), std::invalid_argument);
    }
}

TEST_CASE("connection")
{
    const auto sys = submarine_double(2, 2, 3, 5, 5, 7);
    std::mt19937 rng(23);

    SUBCASE("nabla_x x = (1/2) <x : x>")
    {
        for (int trial = 0; trial < 50; ++trial) {
            const Vec x = random_vec(rng, 6);
            const Vec lhs = sys.connection(x, x);
            const Vec rhs = 0.5 * sys.symmetric_product(x, x);
            CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
        }
    }

    SUBCASE("nabla_x y + nabla_y x = <x : y> and nabla_x y - nabla_y x = [x, y]")
    {
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_vec(rng, 6);
            const Vec y = random_vec(rng, 6);
            const Vec sum = sys.connection(x, y) + sys.connection(y, x);
            const Vec diff = sys.connection(x, y) - sys.connection(y, x);
            CHECK((sum - sys.symmetric_product(x, y)).norm() <= 1e-12 * (1.0 + sum.norm()));
            CHECK((diff - sys.algebra().bracket(x, y)).norm() <= 1e-12 * (1.0 + diff.norm()));
        }
    }

    SUBCASE("submarine: nabla_e1 e1 = 0")
    {
        const Vec e1 = sys.algebra().basis_vector(1);
        CHECK(sys.connection(e1, e1).norm() == 0.0);
    }
}

TEST_CASE("energy")
{
    const auto sys = submarine_double(1, 2, 3, 4, 5, 6);

    CHECK(sys.energy(sys.algebra().zero()) == 0.0);
    CHECK(sys.energy(sys.algebra().basis_vector(1)) == doctest::Approx(0.5));

    std::mt19937 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec xi = random_vec(rng, 6);
        if (xi.norm() > 1e-8)
            CHECK(sys.energy(xi) > 0.0);
    }
}

TEST_CASE("construction guards")
{
    SUBCASE("non-symmetric inertia rejected")
    {
        Mat m = Mat::Identity(6, 6);
        m(0, 1) = 0.5;
        CHECK_THROWS_AS(InertiaTensor{m}, std::invalid_argument);
    }

    SUBCASE("indefinite inertia rejected, double and exact")
    {
        Mat m = Mat::Identity(6, 6);
        m(3, 3) = -2.0;
        CHECK_THROWS_AS(InertiaTensor{m}, std::invalid_argument);

        MatT<Rat> mq = MatT<Rat>::Identity(3, 3);
        mq(2, 2) = Rat(-1);
        CHECK_THROWS_AS(InertiaTensorT<Rat>{mq}, std::invalid_argument);
    }

    SUBCASE("empty control list rejected")
    {
        CHECK_THROWS_AS(MechSystem(se3(), InertiaTensor(Mat::Identity(6, 6)),
                                   std::vector<Vec>{}),
                        std::invalid_argument);
    }

    SUBCASE("drift dimensions validated")
    {
        Mat d(5, 5);
        d.setZero();
        CHECK_THROWS_AS(MechSystem(se3(), InertiaTensor(Mat::Identity(6, 6)),
                                   {se3().basis_vector(1)}, se3().zero(), d),
                        std::invalid_argument);
    }
}
