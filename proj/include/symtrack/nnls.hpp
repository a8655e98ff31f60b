#pragma once

#include "symtrack/rational.hpp"

#include <stdexcept>

namespace symtrack {

/// Feasibility/least-squares backend failed to converge; callers must treat
/// the query as indeterminate rather than negative.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NnlsResult {
    Vec x;           // minimizer, x >= 0
    double residual; // |A x - b|
    int iterations;
};

/// Lawson-Hanson active-set solver for min |A x - b| subject to x >= 0.
/// Terminates in finitely many steps; throws SolverFailure if the iteration
/// guard is exhausted.
NnlsResult nnls(const Mat& a, const Vec& b, int max_iter = -1);

} // namespace symtrack
