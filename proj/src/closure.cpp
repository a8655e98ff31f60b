#include "symtrack/closure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symtrack {

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::ctp_by_z: return "CTP_by_Z";
    case Verdict::sctp_by_track_z: return "SCTP_by_trackZ";
    case Verdict::ctp_by_k: return "CTP_by_K";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Mat FieldFamily::matrix() const
{
    Mat m(ambient_dim, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = members[j];
    return m;
}

namespace {

/// Incremental orthonormal basis used for rank pruning.
class SpanTracker {
public:
    SpanTracker(int dim, double rank_tol) : dim_(dim), tol_(rank_tol) {}

    /// Residual of v against the current span, relative to |v|.
    double relative_residual(const Vec& v) const
    {
        const double norm = v.norm();
        if (norm == 0.0)
            return 0.0;
        Vec r = v;
        for (const Vec& q : basis_)
            r -= q.dot(r) * q;
        // one re-orthogonalization pass keeps the residual trustworthy
        for (const Vec& q : basis_)
            r -= q.dot(r) * q;
        return r.norm() / norm;
    }

    /// Adds v if it extends the span; returns true when added.
    bool add(const Vec& v)
    {
        const double norm = v.norm();
        if (norm == 0.0)
            return false;
        Vec r = v;
        for (const Vec& q : basis_)
            r -= q.dot(r) * q;
        for (const Vec& q : basis_)
            r -= q.dot(r) * q;
        if (r.norm() <= tol_ * norm)
            return false;
        basis_.push_back(r / r.norm());
        return true;
    }

    int rank() const { return static_cast<int>(basis_.size()); }
    bool full(int n) const { return rank() >= n; }

private:
    int dim_;
    double tol_;
    std::vector<Vec> basis_;
};

FieldFamily level_zero(const MechSystem& sys)
{
    FieldFamily fam;
    fam.ambient_dim = sys.algebra().dim();
    fam.level = 0;
    for (int a = 0; a < sys.num_controls(); ++a) {
        fam.members.push_back(sys.controls()[a]);
        fam.provenance.push_back({Provenance::Kind::generator, a, -1});
    }
    return fam;
}

FieldFamily next_level(const MechSystem& sys, const FieldFamily& prev,
                       const ClosureOptions& opts)
{
    FieldFamily fam;
    fam.ambient_dim = prev.ambient_dim;
    fam.level = prev.level + 1;

    double scale = 0.0;
    for (const Vec& m : prev.members)
        scale = std::max(scale, m.norm());

    SpanTracker tracker(fam.ambient_dim, opts.rank_tol);
    auto push = [&](const Vec& v, const Provenance& prov) {
        if (v.norm() <= 1e-14 * std::max(scale, 1.0))
            return;
        if (opts.prune) {
            if (!tracker.add(v))
                return;
        }
        fam.members.push_back(v);
        fam.provenance.push_back(prov);
        if (static_cast<int>(fam.members.size()) > opts.max_members)
            throw std::runtime_error("family growth exceeds the member guard; use pruning");
    };

    for (std::size_t i = 0; i < prev.members.size(); ++i)
        push(prev.members[i], prev.provenance[i]);
    const int m = static_cast<int>(prev.members.size());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b)
            push(sys.symmetric_product(prev.members[a], prev.members[b]),
                 {Provenance::Kind::sym_product, a, b});
    return fam;
}

} // namespace

FieldFamily z_family(const MechSystem& sys, int level, const ClosureOptions& opts)
{
    if (level < 0)
        throw std::invalid_argument("z_family level must be nonnegative");
    FieldFamily fam = level_zero(sys);
    for (int l = 0; l < level; ++l)
        fam = next_level(sys, fam, opts);
    return fam;
}

int span_rank(const FieldFamily& fam, double rank_tol)
{
    if (fam.members.empty())
        return 0;
    Eigen::JacobiSVD<Mat> svd(fam.matrix());
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
        return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rank_tol * sv(0))
            ++rank;
    return rank;
}

bool in_span(const Mat& basis, const Vec& v, double tol)
{
    const double norm = v.norm();
    if (norm == 0.0)
        return true;
    if (basis.cols() == 0)
        return false;
    const Vec coeffs = basis.colPivHouseholderQr().solve(v);
    return (basis * coeffs - v).norm() <= tol * norm;
}

std::vector<bool> condition3_check(const MechSystem& sys, int l, const ClosureOptions& opts)
{
    if (l < 1)
        throw std::invalid_argument("condition3_check needs l >= 1");
    std::vector<bool> result;
    FieldFamily fam = z_family(sys, 0, opts);
    for (int i = 0; i < l; ++i) {
        if (i > 0)
            fam = z_family(sys, i, opts);
        const Mat basis = fam.matrix();
        bool ok = true;
        for (const Vec& z : fam.members) {
            if (!in_span(basis, sys.symmetric_product(z, z), opts.span_tol)) {
                ok = false;
                break;
            }
        }
        result.push_back(ok);
    }
    return result;
}

FieldFamily lie_closure(const LieAlgebra& g, const FieldFamily& fam, int max_depth,
                        const ClosureOptions& opts)
{
    if (max_depth < 1)
        throw std::invalid_argument("lie_closure max_depth must be at least 1");
    FieldFamily out;
    out.ambient_dim = fam.ambient_dim == 0 ? g.dim() : fam.ambient_dim;
    out.level = fam.level;

    SpanTracker tracker(out.ambient_dim, opts.rank_tol);
    std::vector<int> depth;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        if (tracker.add(fam.members[i])) {
            out.members.push_back(fam.members[i]);
            out.provenance.push_back(fam.provenance[i]);
            depth.push_back(1);
        }
    }

    bool grew = true;
    while (grew && !tracker.full(out.ambient_dim)) {
        grew = false;
        const int m = static_cast<int>(out.members.size());
        for (int a = 0; a < m; ++a) {
            for (int b = a + 1; b < m; ++b) {
                if (depth[a] + depth[b] > max_depth)
                    continue;
                const Vec br = g.bracket(out.members[a], out.members[b]);
                if (tracker.add(br)) {
                    out.members.push_back(br);
                    out.provenance.push_back({Provenance::Kind::lie_bracket, a, b});
                    depth.push_back(depth[a] + depth[b]);
                    grew = true;
                }
            }
        }
    }
    return out;
}

FieldFamily sym1(const MechSystem& sys, const FieldFamily& fam)
{
    FieldFamily out = fam;
    const int m = static_cast<int>(fam.members.size());
    double scale = 0.0;
    for (const Vec& v : fam.members)
        scale = std::max(scale, v.norm());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const Vec p = sys.symmetric_product(fam.members[a], fam.members[b]);
            if (p.norm() <= 1e-14 * std::max(scale, 1.0))
                continue;
            out.members.push_back(p);
            out.provenance.push_back({Provenance::Kind::sym_product, a, b});
        }
    return out;
}

bool is_kinematic_reduction(const MechSystem& sys, const FieldFamily& controls,
                            const FieldFamily& candidate, const ClosureOptions& opts)
{
    if (candidate.members.empty())
        return true;
    const FieldFamily extended = sym1(sys, candidate);
    const Mat basis = controls.matrix();
    for (const Vec& v : extended.members)
        if (!in_span(basis, v, opts.span_tol))
            return false;
    return true;
}

AnalysisReport analyze_z(const MechSystem& sys, int l_max, const ClosureOptions& opts)
{
    if (l_max < 1)
        throw std::invalid_argument("analyze_z needs l_max >= 1");
    const int n = sys.algebra().dim();

    std::vector<FieldFamily> families;
    families.push_back(z_family(sys, 0, opts));
    for (int l = 1; l <= l_max; ++l)
        families.push_back(next_level(sys, families.back(), opts));

    AnalysisReport report;
    report.analyzer = "z";

    std::vector<int> span_dims(l_max + 1), lie_dims(l_max + 1);
    std::vector<bool> cond3(l_max + 1);
    for (int l = 0; l <= l_max; ++l) {
        span_dims[l] = span_rank(families[l], opts.rank_tol);
        lie_dims[l] =
            span_rank(lie_closure(sys.algebra(), families[l], 2 * n, opts), opts.rank_tol);
        const Mat basis = families[l].matrix();
        bool ok = true;
        for (const Vec& z : families[l].members)
            if (!in_span(basis, z, opts.span_tol) ||
                !in_span(basis, sys.symmetric_product(z, z), opts.span_tol)) {
                ok = false;
                break;
            }
        cond3[l] = ok;
        report.levels.push_back({l, span_dims[l], lie_dims[l], ok});
    }

    for (int l = 1; l <= l_max; ++l)
        if (span_dims[l] < span_dims[l - 1] || span_dims[l] > n)
            throw std::logic_error("span dimensions must be nondecreasing and bounded by n");

    auto drift_in_span = [&](int l) {
        const Mat basis = families[l].matrix();
        if (!in_span(basis, sys.drift_const(), opts.span_tol))
            return false;
        for (int c = 0; c < n; ++c)
            if (!in_span(basis, sys.drift_linear().col(c), opts.span_tol))
                return false;
        return true;
    };
    auto hypotheses = [&](int l) {
        for (int i = 0; i < l; ++i)
            if (!cond3[i])
                return false;
        return drift_in_span(l);
    };

    std::optional<int> sctp_level, ctp_level;
    for (int l = 1; l <= l_max; ++l) {
        if (!hypotheses(l))
            continue;
        if (!sctp_level && span_dims[l] == n)
            sctp_level = l;
        if (!ctp_level && lie_dims[l - 1] == n)
            ctp_level = l;
    }

    if (sctp_level) {
        report.verdict = Verdict::sctp_by_track_z;
        report.witness_level = sctp_level;
    } else if (ctp_level) {
        report.verdict = Verdict::ctp_by_z;
        report.witness_level = ctp_level;
    } else {
        report.verdict = Verdict::inconclusive;
    }
    report.drift_in_span = drift_in_span(report.witness_level.value_or(l_max));
    return report;
}

bool trackable_curve_z(const MechSystem& sys, const ReferenceCurve& curve,
                       const AnalysisReport& report, int samples, double tol)
{
    if (!report.witness_level)
        throw std::invalid_argument("trackable_curve_z needs a report with a witness level");
    ClosureOptions opts;
    const FieldFamily prev = z_family(sys, *report.witness_level - 1, opts);
    const FieldFamily closure = lie_closure(sys.algebra(), prev, 2 * sys.algebra().dim(), opts);
    const Mat basis = closure.matrix();
    for (int s = 0; s < samples; ++s) {
        const double t = curve.duration() * s / (samples - 1);
        const Vec xi = curve.body_velocity(t);
        if (!in_span(basis, xi, tol))
            return false;
    }
    return true;
}

} // namespace symtrack
