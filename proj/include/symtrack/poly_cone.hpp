#pragma once

#include "symtrack/closure.hpp"
#include "symtrack/mech_system.hpp"
#include "symtrack/report.hpp"

#include <optional>
#include <vector>

namespace symtrack {

/// Where a cone ray came from: a spanning direction of the level-0 control
/// space, or -<Z:Z> for a recorded sample Z of a lineality sphere.
struct RayOrigin {
    enum class Kind { base, sampled };
    Kind kind = Kind::base;
    Vec sample; // the Z that produced the ray, when kind == sampled
};

/// Polyhedral convex cone: conic hull of rays plus a lineality subspace.
/// Inner approximation semantics throughout this module: every stored ray is
/// an exact member of the true cone, so membership answers can under-claim
/// but never over-claim.
struct PolyCone {
    int ambient_dim = 0;
    std::vector<Vec> rays;      // nonzero generators
    std::vector<Vec> lineality; // orthonormal basis of the known linear part
    std::vector<RayOrigin> origins;

    Mat ray_matrix() const;
    Mat lineality_matrix() const;
};

struct ConeOptions {
    double member_tol = 1e-8;   // relative distance threshold for membership
    double rank_tol = 1e-10;    // orthonormalization cutoff
    unsigned seed = 1;          // offset into the low-discrepancy sequence
};

/// Distance-based membership: true iff dist(v, cone) <= tol * |v|.
/// Throws SolverFailure when the feasibility solve does not converge.
bool cone_member(const PolyCone& c, const Vec& v, double tol);

/// Distance from v to the cone (exact up to the NNLS solve).
double cone_distance(const PolyCone& c, const Vec& v);

/// Orthonormal basis of {v : v and -v in cone}; detects opposite-ray pairs.
std::vector<Vec> lineality_of(const PolyCone& c, const ConeOptions& opts = {});

/// True when every ray's negation is a member within tol (so the cone is a
/// subspace as far as the stored generators witness).
bool cone_is_subspace(const PolyCone& c, double tol);

/// Deterministic low-discrepancy points on the unit sphere of R^dim
/// (Halton sequence through the normal quantile, prefix-stable in count).
Mat sphere_samples(int dim, int count, unsigned seed = 1);

/// Pointwise cone approximation at level l. Level 0 is the control span as
/// a cone (rays +-basis); level l >= 1 adds -<Z:Z> for Z sampled on the unit
/// sphere of the previous lineality, then recomputes the lineality. By
/// invariance the result is independent of the group point.
PolyCone k_cone(const MechSystem& sys, int l, int samples, const ConeOptions& opts = {});

/// Cone-route analyzer: smallest level where the drift lies in the cone,
/// levels l-1 and l are subspaces (sampling-verified), and the Lie closure
/// of the level-(l-1) lineality is full.
AnalysisReport analyze_k(const MechSystem& sys, int l_max, int samples,
                         const ConeOptions& opts = {});

} // namespace symtrack
