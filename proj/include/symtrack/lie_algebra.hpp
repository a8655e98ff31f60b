#pragma once

#include "symtrack/rational.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symtrack {

/// One structural-constant entry c^k_ij. Indices are 1-based, matching the
/// usual physics convention and the system-spec file format; vector
/// coefficients everywhere else are 0-based Eigen slots.
template <class T>
struct StructEntry {
    int i;
    int j;
    int k;
    T value;
};

template <class T>
inline T abs_value(const T& x)
{
    using std::abs;
    return abs(x);
}

/// Finite-dimensional Lie algebra given by sparse structural constants,
/// [e_i, e_j] = sum_k c^k_ij e_k. Antisymmetric partners are filled in
/// automatically; supplying both orientations with inconsistent values is
/// a construction error. Immutable after construction.
template <class T>
class LieAlgebraT {
public:
    struct Options {
        bool check_jacobi = true;
        double jacobi_tol = 1e-12; // ignored in exact mode
    };

    LieAlgebraT(int dim, const std::vector<StructEntry<T>>& entries,
                std::vector<std::string> labels = {}, Options opts = {})
        : dim_(dim), labels_(std::move(labels))
    {
        if (dim_ <= 0)
            throw std::invalid_argument("algebra dimension must be positive");
        if (labels_.empty()) {
            labels_.reserve(dim_);
            for (int i = 1; i <= dim_; ++i)
                labels_.push_back("e" + std::to_string(i));
        }
        if (static_cast<int>(labels_.size()) != dim_)
            throw std::invalid_argument("label count must equal algebra dimension");

        for (const auto& e : entries) {
            if (e.i < 1 || e.i > dim_ || e.j < 1 || e.j > dim_ || e.k < 1 || e.k > dim_)
                throw std::invalid_argument("structural constant index out of range: c^" +
                                            std::to_string(e.k) + "_{" + std::to_string(e.i) +
                                            "," + std::to_string(e.j) + "}");
            if (e.value == T(0))
                continue;
            if (e.i == e.j)
                throw std::invalid_argument("antisymmetry violated: c^" + std::to_string(e.k) +
                                            "_{" + std::to_string(e.i) + "," + std::to_string(e.i) +
                                            "} must vanish");
            // canonical orientation i < j
            const bool flip = e.i > e.j;
            const std::array<int, 3> key = {flip ? e.j : e.i, flip ? e.i : e.j, e.k};
            const T canon = flip ? T(-e.value) : e.value;
            auto it = constants_.find(key);
            if (it == constants_.end()) {
                constants_.emplace(key, canon);
            } else if (!(it->second == canon)) {
                throw std::invalid_argument("inconsistent antisymmetric pair for c^" +
                                            std::to_string(e.k) + "_{" + std::to_string(key[0]) +
                                            "," + std::to_string(key[1]) + "}");
            }
        }

        if (opts.check_jacobi) {
            const T defect = jacobi_defect();
            bool bad;
            if constexpr (std::is_same_v<T, double>)
                bad = !(to_double(defect) <= opts.jacobi_tol);
            else
                bad = !(defect == T(0));
            if (bad)
                throw std::invalid_argument("structural constants violate the Jacobi identity");
        }
    }

    int dim() const { return dim_; }
    const std::vector<std::string>& basis_labels() const { return labels_; }

    /// c^k_ij, 1-based indices.
    T structure_constant(int i, int j, int k) const
    {
        if (i < 1 || i > dim_ || j < 1 || j > dim_ || k < 1 || k > dim_)
            throw std::invalid_argument("structure_constant index out of range");
        if (i == j)
            return T(0);
        const bool flip = i > j;
        auto it = constants_.find({flip ? j : i, flip ? i : j, k});
        if (it == constants_.end())
            return T(0);
        return flip ? T(-it->second) : it->second;
    }

    /// Canonical nonzero entries (i < j orientation only).
    std::vector<StructEntry<T>> entries() const
    {
        std::vector<StructEntry<T>> out;
        out.reserve(constants_.size());
        for (const auto& [key, value] : constants_)
            out.push_back({key[0], key[1], key[2], value});
        return out;
    }

    VecT<T> basis_vector(int i) const
    {
        if (i < 1 || i > dim_)
            throw std::invalid_argument("basis index out of range");
        VecT<T> v = VecT<T>::Constant(dim_, T(0));
        v(i - 1) = T(1);
        return v;
    }

    VecT<T> zero() const { return VecT<T>::Constant(dim_, T(0)); }

    /// [x, y]^k = sum_ij c^k_ij x^i y^j.
    VecT<T> bracket(const VecT<T>& x, const VecT<T>& y) const
    {
        require_conforming(x, "bracket");
        require_conforming(y, "bracket");
        VecT<T> out = zero();
        for (const auto& [key, c] : constants_) {
            const int i = key[0] - 1, j = key[1] - 1, k = key[2] - 1;
            out(k) += c * (x(i) * y(j) - x(j) * y(i));
        }
        return out;
    }

    /// (ad*_x alpha)_j = sum_ik x^i c^k_ij alpha_k, i.e. (ad*_x alpha)(y) = alpha([x, y]).
    VecT<T> ad_star(const VecT<T>& x, const VecT<T>& alpha) const
    {
        require_conforming(x, "ad_star");
        require_conforming(alpha, "ad_star");
        VecT<T> out = zero();
        for (const auto& [key, c] : constants_) {
            const int i = key[0] - 1, j = key[1] - 1, k = key[2] - 1;
            out(j) += x(i) * c * alpha(k);
            out(i) -= x(j) * c * alpha(k); // partner orientation c^k_ji = -c
        }
        return out;
    }

    /// Matrix of ad_x acting on the algebra, (ad_x)_{kj} = sum_i c^k_ij x^i.
    MatT<T> ad_matrix(const VecT<T>& x) const
    {
        require_conforming(x, "ad_matrix");
        MatT<T> out = MatT<T>::Constant(dim_, dim_, T(0));
        for (const auto& [key, c] : constants_) {
            const int i = key[0] - 1, j = key[1] - 1, k = key[2] - 1;
            out(k, j) += c * x(i);
            out(k, i) -= c * x(j);
        }
        return out;
    }

    /// Max over (i,j,k,m) of |sum_l (c^l_ij c^m_lk + c^l_jk c^m_li + c^l_ki c^m_lj)|.
    /// Zero exactly when the table is a Lie algebra.
    T jacobi_defect() const
    {
        T worst(0);
        for (int i = 1; i <= dim_; ++i)
            for (int j = i + 1; j <= dim_; ++j)
                for (int k = j + 1; k <= dim_; ++k)
                    for (int m = 1; m <= dim_; ++m) {
                        T sum(0);
                        for (int l = 1; l <= dim_; ++l) {
                            sum += structure_constant(i, j, l) * structure_constant(l, k, m);
                            sum += structure_constant(j, k, l) * structure_constant(l, i, m);
                            sum += structure_constant(k, i, l) * structure_constant(l, j, m);
                        }
                        const T mag = abs_value(sum);
                        if (worst < mag)
                            worst = mag;
                    }
        return worst;
    }

    void require_conforming(const VecT<T>& v, const char* where) const
    {
        if (v.size() != dim_)
            throw std::invalid_argument(std::string(where) + ": vector length " +
                                        std::to_string(v.size()) + " does not match algebra dimension " +
                                        std::to_string(dim_));
    }

private:
    int dim_;
    std::map<std::array<int, 3>, T> constants_;
    std::vector<std::string> labels_;
};

using LieAlgebra = LieAlgebraT<double>;
using LieAlgebraQ = LieAlgebraT<Rat>;

namespace detail {

template <class T>
std::vector<StructEntry<T>> se3_entries()
{
    // [e2,e3]=e1, [e3,e1]=e2, [e1,e2]=e3 (rotations),
    // [e2,e6]=e4, [e5,e3]=e4, [e3,e4]=e5, [e6,e1]=e5, [e1,e5]=e6, [e4,e2]=e6.
    // Antisymmetric partners are filled automatically (18 nonzero constants).
    return {
        {2, 3, 1, T(1)}, {3, 1, 2, T(1)}, {1, 2, 3, T(1)},
        {2, 6, 4, T(1)}, {5, 3, 4, T(1)}, {3, 4, 5, T(1)},
        {6, 1, 5, T(1)}, {1, 5, 6, T(1)}, {4, 2, 6, T(1)},
    };
}

} // namespace detail

/// se(3) with angular slots 1-3 and linear slots 4-6.
inline LieAlgebra se3()
{
    return LieAlgebra(6, detail::se3_entries<double>());
}

/// Exact-arithmetic se(3), for golden-constant checks.
inline LieAlgebraQ se3_exact()
{
    return LieAlgebraQ(6, detail::se3_entries<Rat>());
}

/// Skew matrix S(x) with S(x)y = x cross y.
inline Eigen::Matrix3d hat(const Eigen::Vector3d& x)
{
    Eigen::Matrix3d s;
    s << 0, -x(2), x(1),
         x(2), 0, -x(0),
         -x(1), x(0), 0;
    return s;
}

} // namespace symtrack
