#pragma once

#include "symtrack/curves.hpp"
#include "symtrack/mech_system.hpp"
#include "symtrack/report.hpp"

#include <optional>
#include <vector>

namespace symtrack {

/// Where a family member came from: an original control, a symmetric product
/// of two previous-level members, or a Lie bracket of two closure members.
struct Provenance {
    enum class Kind { generator, sym_product, lie_bracket };
    Kind kind = Kind::generator;
    int a = -1; // generator index, or first parent index
    int b = -1; // second parent index
};

/// Ordered set of invariant vector fields with generation provenance.
struct FieldFamily {
    int ambient_dim = 0;
    int level = 0;
    std::vector<Vec> members;
    std::vector<Provenance> provenance;

    /// n x m matrix with members as columns.
    Mat matrix() const;
};

struct ClosureOptions {
    double rank_tol = 1e-10; // singular values below rank_tol * sigma_max count as zero
    double span_tol = 1e-8;  // relative residual for span-membership tests
    bool prune = true;       // keep only a spanning subset at each level
    int max_members = 20000; // guard for unpruned growth
};

/// Level-l iterated symmetric-product family: Z_0 = controls,
/// Z_l = Z_{l-1} plus all pairwise products of Z_{l-1} members.
FieldFamily z_family(const MechSystem& sys, int level, const ClosureOptions& opts = {});

/// dim span of the members (rank-revealing SVD).
int span_rank(const FieldFamily& fam, double rank_tol = 1e-10);

/// v in span(members) up to a relative residual.
bool in_span(const Mat& basis, const Vec& v, double tol);

/// For each i < l: does <Z:Z> stay in span Z_i for every member Z of Z_i?
std::vector<bool> condition3_check(const MechSystem& sys, int l,
                                   const ClosureOptions& opts = {});

/// Family spanning Lie(members), brackets up to length max_depth; stops early
/// at a rank fixed point.
FieldFamily lie_closure(const LieAlgebra& g, const FieldFamily& fam, int max_depth,
                        const ClosureOptions& opts = {});

/// fam plus all pairwise symmetric products of fam members.
FieldFamily sym1(const MechSystem& sys, const FieldFamily& fam);

/// Kinematic-reduction test: span(sym1(candidate)) inside span(controls).
bool is_kinematic_reduction(const MechSystem& sys, const FieldFamily& controls,
                            const FieldFamily& candidate, const ClosureOptions& opts = {});

/// Trackability analysis over levels 1..l_max. Scans for the strongest
/// verdict: SCTP when some level's span is the whole algebra, CTP when the
/// Lie closure of the previous level is, both subject to the drift and
/// per-level product conditions. witness_level is the smallest level
/// achieving the reported verdict.
AnalysisReport analyze_z(const MechSystem& sys, int l_max, const ClosureOptions& opts = {});

/// True when the curve's body velocity stays in span(Lie(Z_{l-1})) at every
/// sample, l the report's witness level.
bool trackable_curve_z(const MechSystem& sys, const ReferenceCurve& curve,
                       const AnalysisReport& report, int samples = 201,
                       double tol = 1e-8);

} // namespace symtrack
