#pragma once

#include "symtrack/lie_algebra.hpp"
#include "symtrack/rational.hpp"

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace symtrack {

namespace detail {

/// Gauss-Jordan inverse with partial pivoting; exact for rational scalars.
template <class T>
MatT<T> invert_matrix(MatT<T> a)
{
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n)
        throw std::invalid_argument("invert_matrix: matrix must be square");
    MatT<T> inv = MatT<T>::Identity(n, n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        T best = abs_value(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            const T mag = abs_value(a(r, col));
            if (best < mag) {
                best = mag;
                pivot = r;
            }
        }
        if (a(pivot, col) == T(0))
            throw std::invalid_argument("invert_matrix: singular matrix");
        if (pivot != col) {
            a.row(pivot).swap(a.row(col));
            inv.row(pivot).swap(inv.row(col));
        }
        const T d = a(col, col);
        for (int c = 0; c < n; ++c) {
            a(col, c) = a(col, c) / d;
            inv(col, c) = inv(col, c) / d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const T f = a(r, col);
            if (f == T(0))
                continue;
            for (int c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

/// Determinant by fraction-free-ish Gaussian elimination; exact for rationals.
template <class T>
T determinant(MatT<T> a)
{
    const int n = static_cast<int>(a.rows());
    T det(1);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r) {
            if (!(a(r, col) == T(0))) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0)
            return T(0);
        if (pivot != col) {
            a.row(pivot).swap(a.row(col));
            det = -det;
        }
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const T f = a(r, col) / a(col, col);
            for (int c = col; c < n; ++c)
                a(r, c) -= f * a(col, c);
        }
    }
    return det;
}

} // namespace detail

/// Symmetric positive-definite inertia tensor on the algebra.
template <class T>
class InertiaTensorT {
public:
    explicit InertiaTensorT(MatT<T> matrix) : m_(std::move(matrix))
    {
        const int n = static_cast<int>(m_.rows());
        if (m_.cols() != n || n == 0)
            throw std::invalid_argument("inertia tensor must be square and nonempty");
        check_symmetric();
        check_positive_definite();
        minv_ = detail::invert_matrix<T>(m_);
    }

    static InertiaTensorT diagonal(const VecT<T>& d)
    {
        MatT<T> m = MatT<T>::Constant(d.size(), d.size(), T(0));
        for (int i = 0; i < d.size(); ++i)
            m(i, i) = d(i);
        return InertiaTensorT(std::move(m));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const MatT<T>& matrix() const { return m_; }
    const MatT<T>& inverse() const { return minv_; }

private:
    void check_symmetric() const
    {
        if constexpr (std::is_same_v<T, double>) {
            const double scale = m_.template lpNorm<Eigen::Infinity>();
            if ((m_ - m_.transpose()).template lpNorm<Eigen::Infinity>() > 1e-12 * std::max(scale, 1.0))
                throw std::invalid_argument("inertia tensor is not symmetric");
        } else {
            for (int i = 0; i < m_.rows(); ++i)
                for (int j = i + 1; j < m_.cols(); ++j)
                    if (!(m_(i, j) == m_(j, i)))
                        throw std::invalid_argument("inertia tensor is not symmetric");
        }
    }

    void check_positive_definite() const
    {
        if constexpr (std::is_same_v<T, double>) {
            Eigen::SelfAdjointEigenSolver<Mat> es(m_);
            if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
                throw std::invalid_argument("inertia tensor is not positive definite");
        } else {
            // Sylvester criterion, exact: all leading principal minors positive.
            for (int k = 1; k <= m_.rows(); ++k) {
                MatT<T> lead = m_.topLeftCorner(k, k);
                if (!(T(0) < detail::determinant<T>(lead)))
                    throw std::invalid_argument("inertia tensor is not positive definite");
            }
        }
    }

    MatT<T> m_;
    MatT<T> minv_;
};

/// Sparse table of symmetric-product constants gamma^k_ij = <e_i : e_j>^k.
template <class T>
class GammaTable {
public:
    GammaTable(int dim, std::map<std::array<int, 3>, T> entries)
        : dim_(dim), entries_(std::move(entries))
    {
    }

    /// gamma^k_ij, 1-based; symmetric in (i, j).
    T gamma(int i, int j, int k) const
    {
        if (i > j)
            std::swap(i, j);
        auto it = entries_.find({i, j, k});
        return it == entries_.end() ? T(0) : it->second;
    }

    const std::map<std::array<int, 3>, T>& entries() const { return entries_; }
    int dim() const { return dim_; }

private:
    int dim_;
    std::map<std::array<int, 3>, T> entries_;
};

/// Invariant forced affine-connection control system on a Lie group, in body
/// coordinates: inertia metric, control directions Y_a, and affine drift
/// Y(v) = Y0 + D v. Immutable after construction.
template <class T>
class MechSystemT {
public:
    MechSystemT(LieAlgebraT<T> algebra, InertiaTensorT<T> inertia,
                std::vector<VecT<T>> controls)
        : MechSystemT(std::move(algebra), std::move(inertia), std::move(controls),
                      VecT<T>(), MatT<T>())
    {
    }

    MechSystemT(LieAlgebraT<T> algebra, InertiaTensorT<T> inertia,
                std::vector<VecT<T>> controls, VecT<T> drift_const, MatT<T> drift_linear)
        : algebra_(std::move(algebra)),
          inertia_(std::move(inertia)),
          controls_(std::move(controls)),
          drift_const_(std::move(drift_const)),
          drift_linear_(std::move(drift_linear))
    {
        const int n = algebra_.dim();
        if (inertia_.dim() != n)
            throw std::invalid_argument("inertia dimension does not match algebra");
        if (controls_.empty())
            throw std::invalid_argument("control list must be nonempty");
        for (const auto& y : controls_)
            algebra_.require_conforming(y, "control field");
        if (drift_const_.size() == 0)
            drift_const_ = VecT<T>::Constant(n, T(0));
        algebra_.require_conforming(drift_const_, "drift");
        if (drift_linear_.size() == 0)
            drift_linear_ = MatT<T>::Constant(n, n, T(0));
        if (drift_linear_.rows() != n || drift_linear_.cols() != n)
            throw std::invalid_argument("drift matrix must be n x n");
    }

    const LieAlgebraT<T>& algebra() const { return algebra_; }
    const InertiaTensorT<T>& inertia() const { return inertia_; }
    const std::vector<VecT<T>>& controls() const { return controls_; }
    int num_controls() const { return static_cast<int>(controls_.size()); }
    const VecT<T>& drift_const() const { return drift_const_; }
    const MatT<T>& drift_linear() const { return drift_linear_; }

    bool has_drift() const
    {
        return !(drift_const_ == VecT<T>::Constant(algebra_.dim(), T(0)) &&
                 drift_linear_ == MatT<T>::Constant(algebra_.dim(), algebra_.dim(), T(0)));
    }

    /// Drift force Y(v) = Y0 + D v in body coordinates.
    VecT<T> drift(const VecT<T>& v) const { return drift_const_ + drift_linear_ * v; }

    /// <x : y> = -M^{-1}(ad*_x M y + ad*_y M x).
    VecT<T> symmetric_product(const VecT<T>& x, const VecT<T>& y) const
    {
        algebra_.require_conforming(x, "symmetric_product");
        algebra_.require_conforming(y, "symmetric_product");
        const VecT<T> mx = inertia_.matrix() * x;
        const VecT<T> my = inertia_.matrix() * y;
        const VecT<T> s = algebra_.ad_star(x, my) + algebra_.ad_star(y, mx);
        return -(inertia_.inverse() * s);
    }

    /// gamma^k_ij = -M^{hk}(M_il c^l_jh + M_jl c^l_ih), computed from the
    /// structural constants directly (not via symmetric_product).
    GammaTable<T> gamma_constants() const
    {
        const int n = algebra_.dim();
        const MatT<T>& m = inertia_.matrix();
        const MatT<T>& minv = inertia_.inverse();
        std::map<std::array<int, 3>, T> table;
        for (int i = 1; i <= n; ++i)
            for (int j = i; j <= n; ++j)
                for (int k = 1; k <= n; ++k) {
                    T sum(0);
                    for (int h = 1; h <= n; ++h) {
                        T inner(0);
                        for (int l = 1; l <= n; ++l)
                            inner += m(i - 1, l - 1) * algebra_.structure_constant(j, h, l) +
                                     m(j - 1, l - 1) * algebra_.structure_constant(i, h, l);
                        sum += minv(h - 1, k - 1) * inner;
                    }
                    if (!(sum == T(0)))
                        table.emplace(std::array<int, 3>{i, j, k}, -sum);
                }
        return GammaTable<T>(n, std::move(table));
    }

    /// Levi-Civita covariant derivative of invariant fields,
    /// nabla_x y = (1/2)([x, y] + <x : y>).
    VecT<T> connection(const VecT<T>& x, const VecT<T>& y) const
    {
        const VecT<T> sum = algebra_.bracket(x, y) + symmetric_product(x, y);
        return sum / T(2);
    }

    /// Kinetic energy (1/2) xi^T M xi.
    T energy(const VecT<T>& xi) const
    {
        algebra_.require_conforming(xi, "energy");
        const VecT<T> mxi = inertia_.matrix() * xi;
        T acc(0);
        for (int i = 0; i < xi.size(); ++i)
            acc += xi(i) * mxi(i);
        return acc / T(2);
    }

private:
    LieAlgebraT<T> algebra_;
    InertiaTensorT<T> inertia_;
    std::vector<VecT<T>> controls_;
    VecT<T> drift_const_;
    MatT<T> drift_linear_;
};

using InertiaTensor = InertiaTensorT<double>;
using MechSystem = MechSystemT<double>;
using MechSystemQ = MechSystemT<Rat>;

/// The paper's underwater-vehicle system: se(3), diagonal inertia
/// diag(J1,J2,J3,M1,M2,M3), controls Y1 = e1/J1, Y2 = e2/J2, Y3 = e6/M3.
template <class T>
MechSystemT<T> submarine_system(const T& j1, const T& j2, const T& j3,
                                const T& m1, const T& m2, const T& m3)
{
    LieAlgebraT<T> g(6, detail::se3_entries<T>());
    VecT<T> d(6);
    d << j1, j2, j3, m1, m2, m3;
    auto inertia = InertiaTensorT<T>::diagonal(d);
    std::vector<VecT<T>> controls;
    controls.push_back(g.basis_vector(1) / j1);
    controls.push_back(g.basis_vector(2) / j2);
    controls.push_back(g.basis_vector(6) / m3);
    return MechSystemT<T>(std::move(g), std::move(inertia), std::move(controls));
}

} // namespace symtrack
