#include "symtrack/poly_cone.hpp"

#include "symtrack/nnls.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symtrack {

Mat PolyCone::ray_matrix() const
{
    Mat m(ambient_dim, static_cast<Eigen::Index>(rays.size()));
    for (std::size_t j = 0; j < rays.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = rays[j];
    return m;
}

Mat PolyCone::lineality_matrix() const
{
    Mat m(ambient_dim, static_cast<Eigen::Index>(lineality.size()));
    for (std::size_t j = 0; j < lineality.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = lineality[j];
    return m;
}

namespace {

Vec project_out(const std::vector<Vec>& basis, Vec v)
{
    for (const Vec& q : basis)
        v -= q.dot(v) * q;
    for (const Vec& q : basis)
        v -= q.dot(v) * q;
    return v;
}

std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vs, int dim, double rank_tol)
{
    std::vector<Vec> basis;
    if (vs.empty())
        return basis;
    Mat m(dim, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = vs[j];
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
        return basis;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rank_tol * sv(0))
            basis.push_back(svd.matrixU().col(i));
    return basis;
}

} // namespace

double cone_distance(const PolyCone& c, const Vec& v)
{
    if (v.size() != c.ambient_dim)
        throw std::invalid_argument("cone_distance: dimension mismatch");
    const Vec v_perp = project_out(c.lineality, v);
    if (c.rays.empty())
        return v_perp.norm();
    Mat rays_perp(c.ambient_dim, static_cast<Eigen::Index>(c.rays.size()));
    for (std::size_t j = 0; j < c.rays.size(); ++j)
        rays_perp.col(static_cast<Eigen::Index>(j)) = project_out(c.lineality, c.rays[j]);
    return nnls(rays_perp, v_perp).residual;
}

bool cone_member(const PolyCone& c, const Vec& v, double tol)
{
    const double norm = v.norm();
    if (norm == 0.0)
        return true;
    return cone_distance(c, v) <= tol * norm;
}

std::vector<Vec> lineality_of(const PolyCone& c, const ConeOptions& opts)
{
    std::vector<Vec> generators = c.lineality;
    for (const Vec& r : c.rays)
        if (cone_member(c, -r, opts.member_tol))
            generators.push_back(r);
    return orthonormal_basis(generators, c.ambient_dim, opts.rank_tol);
}

bool cone_is_subspace(const PolyCone& c, double tol)
{
    for (const Vec& r : c.rays)
        if (!cone_member(c, -r, tol))
            return false;
    return true;
}

namespace {

double halton(unsigned long long index, unsigned base)
{
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

// Acklam's rational approximation of the standard normal quantile.
double normal_quantile(double p)
{
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

} // namespace

Mat sphere_samples(int dim, int count, unsigned seed)
{
    if (dim < 1)
        throw std::invalid_argument("sphere_samples: dimension must be positive");
    if (dim > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
        throw std::invalid_argument("sphere_samples: dimension too large");
    Mat out(dim, count);
    int produced = 0;
    unsigned long long index = seed;
    while (produced < count) {
        Vec z(dim);
        for (int d = 0; d < dim; ++d)
            z(d) = normal_quantile(std::clamp(halton(index, kPrimes[d]), 1e-12, 1.0 - 1e-12));
        ++index;
        const double norm = z.norm();
        if (norm < 1e-8)
            continue;
        out.col(produced++) = z / norm;
    }
    return out;
}

PolyCone k_cone(const MechSystem& sys, int l, int samples, const ConeOptions& opts)
{
    if (l < 0)
        throw std::invalid_argument("k_cone level must be nonnegative");
    if (samples < 1)
        throw std::invalid_argument("k_cone needs at least one sample");
    const int n = sys.algebra().dim();

    PolyCone cone;
    cone.ambient_dim = n;
    cone.lineality = orthonormal_basis(sys.controls(), n, opts.rank_tol);
    for (const Vec& q : cone.lineality) {
        cone.rays.push_back(q);
        cone.origins.push_back({RayOrigin::Kind::base, Vec()});
        cone.rays.push_back(-q);
        cone.origins.push_back({RayOrigin::Kind::base, Vec()});
    }

    for (int level = 1; level <= l; ++level) {
        const int d = static_cast<int>(cone.lineality.size());
        if (d > 0) {
            const Mat pts = sphere_samples(d, samples, opts.seed);
            const Mat lin = cone.lineality_matrix();
            double scale = 1.0;
            for (const Vec& r : cone.rays)
                scale = std::max(scale, r.norm());
            for (int s = 0; s < samples; ++s) {
                const Vec z = lin * pts.col(s);
                const Vec ray = -sys.symmetric_product(z, z);
                if (ray.norm() <= 1e-14 * scale)
                    continue;
                cone.rays.push_back(ray);
                cone.origins.push_back({RayOrigin::Kind::sampled, z});
            }
        }
        cone.lineality = lineality_of(cone, opts);
    }
    return cone;
}

AnalysisReport analyze_k(const MechSystem& sys, int l_max, int samples,
                         const ConeOptions& opts)
{
    if (l_max < 1)
        throw std::invalid_argument("analyze_k needs l_max >= 1");
    const int n = sys.algebra().dim();

    AnalysisReport report;
    report.analyzer = "k";

    std::vector<PolyCone> cones;
    std::vector<bool> subspace;
    std::vector<int> lie_dims;
    for (int l = 0; l <= l_max; ++l) {
        cones.push_back(k_cone(sys, l, samples, opts));
        const PolyCone& c = cones.back();
        subspace.push_back(cone_is_subspace(c, opts.member_tol));

        FieldFamily fam;
        fam.ambient_dim = n;
        for (const Vec& q : c.lineality) {
            fam.members.push_back(q);
            fam.provenance.push_back({Provenance::Kind::generator,
                                      static_cast<int>(fam.members.size()) - 1, -1});
        }
        ClosureOptions copts;
        copts.rank_tol = opts.rank_tol;
        lie_dims.push_back(span_rank(lie_closure(sys.algebra(), fam, 2 * n, copts)));

        report.cone_levels.push_back({l, static_cast<int>(c.rays.size()),
                                      static_cast<int>(c.lineality.size()), subspace.back(),
                                      samples});
        report.levels.push_back(
            {l, static_cast<int>(c.lineality.size()), lie_dims.back(), subspace.back()});
    }

    auto drift_in_cone = [&](int l) {
        if (!cone_member(cones[l], sys.drift_const(), opts.member_tol))
            return false;
        for (int c = 0; c < n; ++c) {
            const Vec col = sys.drift_linear().col(c);
            if (!cone_member(cones[l], col, opts.member_tol) ||
                !cone_member(cones[l], Vec(-col), opts.member_tol))
                return false;
        }
        return true;
    };

    for (int l = 1; l <= l_max; ++l) {
        if (!subspace[l - 1] || !subspace[l])
            continue;
        if (!drift_in_cone(l))
            continue;
        if (lie_dims[l - 1] == n) {
            report.verdict = Verdict::ctp_by_k;
            report.witness_level = l;
            report.drift_in_span = true;
            break;
        }
    }
    if (!report.witness_level)
        report.drift_in_span = drift_in_cone(l_max);
    return report;
}

} // namespace symtrack
