#include "engel/group.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "engel/detail/quadrature.hpp"

namespace engel {

namespace {

std::array<double, 4> to_array(const GroupElement& g) {
    return {g.x1, g.x2, g.x3, g.x4};
}

GroupElement from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

// integral of |y|^k exp(-c y^2) over R; equals the plain moment for even k
double abs_moment(int k, double c) {
    return std::exp(std::lgamma(0.5 * (k + 1))) / std::pow(c, 0.5 * (k + 1));
}

// integral of y^k exp(-c y^2) over R
double centered_moment(int k, double c) {
    if (k % 2 == 1) return 0.0;
    return abs_moment(k, c);
}

// integral of x^k exp(-c (x-b)^2) over R
double shifted_moment(int k, double c, double b) {
    if (b == 0.0) return centered_moment(k, c);
    double acc = 0.0;
    for (int j = 0; j <= k; j += 2) // odd centered moments vanish
        acc += binomial(k, k - j) * ipow(b, k - j) * centered_moment(j, c);
    return acc;
}

} // namespace

GroupElement group_product(const GroupElement& x, const GroupElement& y) {
    return from_array(product_components(to_array(x), to_array(y)));
}

GroupElement group_inverse(const GroupElement& x) {
    return from_array(inverse_components(to_array(x)));
}

GroupElement dilate(double r, const GroupElement& x) {
    if (!(r > 0.0)) throw DomainError("dilate: scale must be positive");
    return from_array(dilate_components(r, to_array(x)));
}

GroupElement identity() { return {}; }

GaussHermiteFunction::GaussHermiteFunction(std::vector<Term> terms,
                                           std::array<double, 4> widths,
                                           std::array<double, 4> centers)
    : terms_(std::move(terms)), widths_(widths), centers_(centers) {
    for (double a : widths_)
        if (!(a > 0.0))
            throw DomainError("GaussHermiteFunction: widths must be positive");
    for (const Term& t : terms_)
        for (int e : t.exps)
            if (e < 0)
                throw DomainError("GaussHermiteFunction: exponents must be >= 0");
    merge_terms();
}

GaussHermiteFunction GaussHermiteFunction::gaussian(std::array<double, 4> widths,
                                                    double coeff) {
    return GaussHermiteFunction({Term{coeff, {0, 0, 0, 0}}}, widths);
}

void GaussHermiteFunction::merge_terms() {
    std::map<std::array<int, 4>, double> merged;
    for (const Term& t : terms_) merged[t.exps] += t.coeff;
    terms_.clear();
    for (const auto& [exps, coeff] : merged)
        if (coeff != 0.0) terms_.push_back({coeff, exps});
}

double GaussHermiteFunction::operator()(const GroupElement& g) const {
    const std::array<double, 4> x = to_array(g);
    double expo = 0.0;
    for (int i = 0; i < 4; ++i) {
        double d = x[i] - centers_[i];
        expo += widths_[i] * d * d;
    }
    double envelope = std::exp(-expo);
    double poly = 0.0;
    for (const Term& t : terms_) {
        double m = t.coeff;
        for (int i = 0; i < 4; ++i) m *= ipow(x[i], t.exps[i]);
        poly += m;
    }
    return poly * envelope;
}

GaussHermiteFunction GaussHermiteFunction::derivative(int axis) const {
    if (axis < 1 || axis > 4) throw DomainError("derivative: axis must be 1..4");
    const int i = axis - 1;
    const double a = widths_[i];
    const double b = centers_[i];
    std::vector<Term> out;
    out.reserve(terms_.size() * 3);
    for (const Term& t : terms_) {
        // d/dx [x^e G] = e x^{e-1} G - 2a x^{e+1} G + 2ab x^e G
        if (t.exps[i] > 0) {
            Term d = t;
            d.coeff *= t.exps[i];
            d.exps[i] -= 1;
            out.push_back(d);
        }
        Term up = t;
        up.coeff *= -2.0 * a;
        up.exps[i] += 1;
        out.push_back(up);
        if (b != 0.0) {
            Term same = t;
            same.coeff *= 2.0 * a * b;
            out.push_back(same);
        }
    }
    return GaussHermiteFunction(std::move(out), widths_, centers_);
}

GaussHermiteFunction GaussHermiteFunction::times_monomial(int axis, int power) const {
    if (axis < 1 || axis > 4) throw DomainError("times_monomial: axis must be 1..4");
    if (power < 0) throw DomainError("times_monomial: power must be >= 0");
    std::vector<Term> out = terms_;
    for (Term& t : out) t.exps[axis - 1] += power;
    return GaussHermiteFunction(std::move(out), widths_, centers_);
}

GaussHermiteFunction GaussHermiteFunction::plus(const GaussHermiteFunction& o) const {
    if (widths_ != o.widths_ || centers_ != o.centers_)
        throw DomainError("plus: operands must share one Gaussian envelope");
    std::vector<Term> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    return GaussHermiteFunction(std::move(out), widths_, centers_);
}

GaussHermiteFunction GaussHermiteFunction::scaled(double factor) const {
    std::vector<Term> out = terms_;
    for (Term& t : out) t.coeff *= factor;
    return GaussHermiteFunction(std::move(out), widths_, centers_);
}

double GaussHermiteFunction::integral() const {
    double acc = 0.0;
    for (const Term& t : terms_) {
        double m = t.coeff;
        for (int i = 0; i < 4; ++i)
            m *= shifted_moment(t.exps[i], widths_[i], centers_[i]);
        acc += m;
    }
    return acc;
}

double GaussHermiteFunction::l2_norm_sq() const {
    double acc = 0.0;
    for (const Term& s : terms_)
        for (const Term& t : terms_) {
            double m = s.coeff * t.coeff;
            for (int i = 0; i < 4; ++i)
                m *= shifted_moment(s.exps[i] + t.exps[i], 2.0 * widths_[i],
                                    centers_[i]);
            acc += m;
        }
    return acc;
}

double GaussHermiteFunction::l1_norm_single_term() const {
    if (terms_.size() != 1)
        throw DomainError("l1_norm_single_term: function has several terms");
    const Term& t = terms_.front();
    double m = std::abs(t.coeff);
    for (int i = 0; i < 4; ++i) {
        const int e = t.exps[i];
        const double a = widths_[i];
        const double b = centers_[i];
        if (b == 0.0 || e == 0) {
            m *= abs_moment(e, a); // shift-invariant when e == 0
        } else {
            // numeric: split at the kink of |x|^e at the origin
            auto f = [&](double x) {
                return std::pow(std::abs(x), e) * std::exp(-a * (x - b) * (x - b));
            };
            double r = std::sqrt(40.0 / a) + std::abs(b);
            double left = detail::integrate_refining(f, -r + b, 0.0, 1e-13).value;
            double right = detail::integrate_refining(f, 0.0, r + b, 1e-13).value;
            m *= left + right;
        }
    }
    return m;
}

double GaussHermiteFunction::l1_upper_bound() const {
    double acc = 0.0;
    for (const Term& t : terms_) {
        GaussHermiteFunction single({t}, widths_, centers_);
        acc += single.l1_norm_single_term();
    }
    return acc;
}

int GaussHermiteFunction::max_total_degree() const {
    int deg = 0;
    for (const Term& t : terms_)
        deg = std::max(deg, t.exps[0] + t.exps[1] + t.exps[2] + t.exps[3]);
    return deg;
}

GaussHermiteFunction apply_field(int i, Side side, const GaussHermiteFunction& u) {
    if (i < 1 || i > 4) throw DomainError("apply_field: index must be 1..4");
    if (side == Side::left) {
        switch (i) {
        case 1:
            return u.derivative(1);
        case 2:
            return u.derivative(2)
                .plus(u.derivative(3).times_monomial(1, 1))
                .plus(u.derivative(4).times_monomial(1, 2).scaled(0.5));
        case 3:
            return u.derivative(3).plus(u.derivative(4).times_monomial(1, 1));
        default:
            return u.derivative(4);
        }
    }
    switch (i) {
    case 1:
        return u.derivative(1)
            .plus(u.derivative(3).times_monomial(2, 1))
            .plus(u.derivative(4).times_monomial(3, 1));
    case 2:
        return u.derivative(2);
    case 3:
        return u.derivative(3);
    default:
        return u.derivative(4);
    }
}

GaussHermiteFunction sublaplacian(const GaussHermiteFunction& u, Side side) {
    GaussHermiteFunction x1u = apply_field(1, side, u);
    GaussHermiteFunction x2u = apply_field(2, side, u);
    return apply_field(1, side, x1u).plus(apply_field(2, side, x2u));
}

namespace {

// Half-width so that exp(-a r^2) times a degree-deg polynomial is below
// ~1e-15 at the box edge.
double axis_halfwidth(double a, int deg) {
    double s = 34.5;
    double r = std::sqrt(s / a);
    r = std::sqrt((s + deg * std::log1p(r)) / a);
    return std::sqrt((s + deg * std::log1p(r)) / a);
}

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

// Jacobi rotations for a symmetric 3x3 matrix; returns eigenvalues in
// lambda and the corresponding orthonormal columns in q.
void jacobi3(Mat3 a, Vec3& lambda, Mat3& q) {
    q = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        double diag = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]);
        if (off <= 1e-15 * (diag + 1e-300)) break;
        for (int p = 0; p < 2; ++p) {
            for (int r = p + 1; r < 3; ++r) {
                if (a[p][r] == 0.0) continue;
                const double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                for (int k = 0; k < 3; ++k) {
                    const double qkp = q[k][p], qkr = q[k][r];
                    q[k][p] = c * qkp - s * qkr;
                    q[k][r] = s * qkp + c * qkr;
                }
            }
        }
    }
    for (int i = 0; i < 3; ++i) lambda[i] = a[i][i];
}

} // namespace

// With d = y1 - x1 the convolution argument z = x . y^{-1} is affine in
// w = (y2, y3, y4):
//   z1 = -d, z2 = x2 - y2, z3 = x3 - y3 + d y2,
//   z4 = x4 - y4 + d y3 - (d^2/2) y2.
// At fixed y1 the product u(z) v(y) is a polynomial times a Gaussian in w
// whose quadratic form combines both envelopes. Tensor Gauss-Legendre in
// the eigenframe of that form converges super-exponentially no matter how
// anisotropic the group twist makes it, so one adaptive quadrature in y1
// around two fixed inner orders suffices.
double convolve_at(const GaussHermiteFunction& u, const GaussHermiteFunction& v,
                   const GroupElement& x, const NumericsSpec& spec) {
    const int deg = u.max_total_degree() + v.max_total_degree();
    const std::array<double, 4>& au = u.widths();
    const std::array<double, 4>& av = v.widths();
    const std::array<double, 4>& bu = u.centers();
    const std::array<double, 4>& bv = v.centers();

    const auto slab = [&](double y1, int n) {
        const double d = y1 - x.x1;
        // rows of the affine maps z_i - b_i^u = r_i . w + c_i
        const std::array<Vec3, 3> rows = {Vec3{-1.0, 0.0, 0.0},
                                          Vec3{d, -1.0, 0.0},
                                          Vec3{-0.5 * d * d, d, -1.0}};
        const Vec3 consts = {x.x2 - bu[1], x.x3 - bu[2], x.x4 - bu[3]};

        Mat3 A{};
        Vec3 beta{};
        for (int i = 0; i < 3; ++i) {
            const double a = au[i + 1];
            for (int p = 0; p < 3; ++p) {
                beta[p] -= a * consts[i] * rows[i][p];
                for (int r = 0; r < 3; ++r) A[p][r] += a * rows[i][p] * rows[i][r];
            }
        }
        for (int i = 0; i < 3; ++i) {
            A[i][i] += av[i + 1];
            beta[i] += av[i + 1] * bv[i + 1];
        }

        Vec3 lam;
        Mat3 q;
        jacobi3(A, lam, q);
        // center m = A^{-1} beta through the eigen factors
        Vec3 qb{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) qb[i] += q[k][i] * beta[k];
        Vec3 m{};
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i) m[k] += q[k][i] * qb[i] / lam[i];

        const detail::QuadRule& rule = detail::gauss_legendre(n);
        std::array<std::vector<double>, 3> ts, ws;
        for (int i = 0; i < 3; ++i) {
            const double r = axis_halfwidth(lam[i], deg);
            ts[i].resize(n);
            ws[i].resize(n);
            for (int k = 0; k < n; ++k) {
                ts[i][k] = r * rule.x[k];
                ws[i][k] = r * rule.w[k];
            }
        }

        double acc = 0.0;
        GroupElement y;
        y.x1 = y1;
        for (int k2 = 0; k2 < n; ++k2) {
            for (int k3 = 0; k3 < n; ++k3) {
                const double w23 = ws[0][k2] * ws[1][k3];
                double acc4 = 0.0;
                for (int k4 = 0; k4 < n; ++k4) {
                    const double t2 = ts[0][k2], t3 = ts[1][k3], t4 = ts[2][k4];
                    y.x2 = m[0] + q[0][0] * t2 + q[0][1] * t3 + q[0][2] * t4;
                    y.x3 = m[1] + q[1][0] * t2 + q[1][1] * t3 + q[1][2] * t4;
                    y.x4 = m[2] + q[2][0] * t2 + q[2][1] * t3 + q[2][2] * t4;
                    const GroupElement z = group_product(x, group_inverse(y));
                    acc4 += ws[2][k4] * u(z) * v(y);
                }
                acc += w23 * acc4;
            }
        }
        return acc;
    };

    // y1 window from the product of the two axis-1 envelopes; the slab value
    // picks up extra powers of d from the z3, z4 substitutions, hence the
    // inflated degree in the tail bound
    const double alpha = au[0] + av[0];
    const double m1 = (au[0] * (x.x1 - bu[0]) + av[0] * bv[0]) / alpha;
    const double r1 = axis_halfwidth(alpha, 3 * deg + 2);

    // refine the inner order until two consecutive outer integrals agree
    double prev = 0.0;
    double disc = 0.0;
    bool have_prev = false;
    for (int n : {24, 34, 48}) {
        const detail::QuadResult q = detail::integrate_refining(
            [&](double y1) { return slab(y1, n); }, m1 - r1, m1 + r1,
            0.25 * spec.quad_tol, 16, 2, 1024);
        disc = std::abs(q.value - prev);
        if (have_prev && disc <= spec.quad_tol * (1.0 + std::abs(q.value)))
            return q.value;
        prev = q.value;
        have_prev = true;
    }
    throw ConvergenceError("convolve_at: inner quadrature did not settle", disc,
                           spec.quad_tol);
}

} // namespace engel
