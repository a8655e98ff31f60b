#include "symtrack/nnls.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace symtrack {

NnlsResult nnls(const Mat& a, const Vec& b, int max_iter)
{
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (b.size() != m)
        throw std::invalid_argument("nnls: rhs length does not match row count");
    if (max_iter < 0)
        max_iter = 10 * std::max(m, n) + 50;

    NnlsResult result;
    result.x = Vec::Zero(n);
    result.iterations = 0;
    if (n == 0) {
        result.residual = b.norm();
        return result;
    }

    const double scale = a.cwiseAbs().maxCoeff() * std::max(b.norm(), 1.0);
    const double tol_w = 1e-12 * std::max(scale, 1.0);

    std::vector<bool> passive(n, false);
    Vec x = Vec::Zero(n);

    auto solve_passive = [&](const std::vector<bool>& mask) -> Vec {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (mask[i])
                idx.push_back(i);
        Mat ap(m, static_cast<int>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c)
            ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
        const Vec zp = ap.colPivHouseholderQr().solve(b);
        Vec z = Vec::Zero(n);
        for (std::size_t c = 0; c < idx.size(); ++c)
            z(idx[c]) = zp(static_cast<Eigen::Index>(c));
        return z;
    };

    for (int outer = 0; outer < max_iter; ++outer) {
        ++result.iterations;
        const Vec w = a.transpose() * (b - a * x);
        int best = -1;
        double best_w = tol_w;
        for (int i = 0; i < n; ++i)
            if (!passive[i] && w(i) > best_w) {
                best_w = w(i);
                best = i;
            }
        if (best < 0)
            break; // KKT satisfied
        passive[best] = true;

        for (int inner = 0; inner <= n; ++inner) {
            if (inner == n)
                throw SolverFailure("nnls: inner loop failed to settle the passive set");
            const Vec z = solve_passive(passive);
            bool feasible = true;
            double alpha = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                if (!passive[i])
                    continue;
                if (z(i) <= 0.0) {
                    feasible = false;
                    const double step = x(i) / (x(i) - z(i));
                    alpha = std::min(alpha, step);
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (int i = 0; i < n; ++i)
                if (passive[i] && x(i) <= 1e-14 * std::max(scale, 1.0)) {
                    passive[i] = false;
                    x(i) = 0.0;
                }
        }
    }

    const Vec w = a.transpose() * (b - a * x);
    for (int i = 0; i < n; ++i)
        if (!passive[i] && w(i) > 10.0 * tol_w + 1e-9 * std::max(scale, 1.0))
            throw SolverFailure("nnls: iteration guard exhausted before optimality");

    result.x = x;
    result.residual = (a * x - b).norm();
    return result;
}

} // namespace symtrack
