#include "rrlmi/oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rrlmi {

namespace {

double min_eig_sym(const Mat& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Mat gaussian(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
    return M;
}

// Integral of uniformly spaced samples: Simpson for an even panel count, Simpson + 3/8 rule
// otherwise, trapezoid for a single panel.
template <class T>
T integrate_uniform(const std::vector<T>& f, double h) {
    const int p = static_cast<int>(f.size()) - 1;
    if (p < 1) return f.empty() ? T{} : T(f[0] * 0.0);
    if (p == 1) return T(0.5 * h * (f[0] + f[1]));
    int simpson_panels = p % 2 == 0 ? p : p - 3;
    T acc = T(f[0] * 0.0);
    for (int k = 0; k + 2 <= simpson_panels; k += 2) acc += T((h / 3.0) * (f[k] + 4.0 * f[k + 1] + f[k + 2]));
    if (simpson_panels != p) {
        const int k = simpson_panels;
        acc += T((3.0 * h / 8.0) * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]));
    }
    return acc;
}

} // namespace

SampledFunction SampledFunction::from(std::function<Vec(double)> f, std::function<Vec(double)> df, double a,
                                      double b, int panels) {
    if (!(b > a)) throw std::invalid_argument("SampledFunction: need b > a");
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    SampledFunction s;
    s.a = a;
    s.b = b;
    const double h = (b - a) / panels;
    for (int k = 0; k <= panels; ++k) {
        const double t = k == panels ? b : a + k * h;
        s.s.push_back(t);
        s.v.push_back(f(t));
        s.dv.push_back(df(t));
    }
    return s;
}

double simpson(const std::vector<double>& values, double h) {
    if ((values.size() - 1) % 2) throw std::invalid_argument("simpson: even panel count required");
    return integrate_uniform(values, h);
}

Vec simpson(const std::vector<Vec>& values, double h) {
    if ((values.size() - 1) % 2) throw std::invalid_argument("simpson: even panel count required");
    return integrate_uniform(values, h);
}

Margin check_lemma1(const SampledFunction& z, const Mat& R) {
    const double L = z.b - z.a;
    const double h = L / (z.s.size() - 1);
    double zmax = 0;
    for (const auto& v : z.v) zmax = std::max(zmax, v.cwiseAbs().maxCoeff());
    if (z.v.front().norm() > 1e-12 * std::max(1.0, zmax)) throw std::invalid_argument("check_lemma1: z(a) != 0");
    std::vector<double> fz, fd;
    for (size_t k = 0; k < z.s.size(); ++k) {
        fz.push_back(z.v[k].dot(R * z.v[k]));
        fd.push_back(z.dv[k].dot(R * z.dv[k]));
    }
    const double rhs = L * L * simpson(fd, h);
    const double lhs = std::numbers::pi * std::numbers::pi / 4.0 * simpson(fz, h);
    return {rhs - lhs, std::max(std::abs(lhs), std::abs(rhs))};
}

Margin check_lemma2(const SampledFunction& x, const Mat& R) {
    const double L = x.b - x.a;
    const double h = L / (x.s.size() - 1);
    std::vector<double> fd;
    for (const auto& d : x.dv) fd.push_back(d.dot(R * d));
    const double lhs = simpson(fd, h);
    const Vec U0 = x.v.back() - x.v.front();
    const Vec U1 = x.v.back() + x.v.front() - (2.0 / L) * simpson(x.v, h);
    const double rhs = (U0.dot(R * U0) + 3.0 * U1.dot(R * U1)) / L;
    return {lhs - rhs, std::max(std::abs(lhs), std::abs(rhs))};
}

Margin check_lemma3(const std::vector<Vec>& delta, const Mat& Rhat, const Mat& G, const std::vector<double>& lengths) {
    const int d = static_cast<int>(delta.size()) - 1;
    if (d < 1 || lengths.size() != delta.size()) throw std::invalid_argument("check_lemma3: need d+1 blocks and lengths");
    const Eigen::Index m = Rhat.rows();
    Mat C5(2 * m, 2 * m);
    C5 << Rhat, G, G.transpose(), Rhat;
    if (min_eig_sym(C5) < -1e-10 * std::max(1.0, Rhat.norm()))
        throw std::invalid_argument("check_lemma3: G coupling constraint violated");
    double tau = 0;
    for (double l : lengths) {
        if (!(l > 0)) throw std::invalid_argument("check_lemma3: lengths must be positive");
        tau += l;
    }
    double lhs = 0;
    Vec all(m * (d + 1));
    for (int v = 0; v <= d; ++v) {
        lhs += delta[v].dot(Rhat * delta[v]) / lengths[v];
        all.segment(v * m, m) = delta[v];
    }
    lhs *= tau;
    const double rhs = all.dot(build_Psi(Rhat, G, d) * all);
    return {lhs - rhs, std::max(std::abs(lhs), std::abs(rhs))};
}

// ---------------------------------------------------------------------------
// Integral bound on the Lyapunov-Krasovskii increment, evaluated on simulation records
// ---------------------------------------------------------------------------

namespace {

struct Grid {
    long long per; // grid points per sampling period
    double h;
    long long k;   // sampling index with t in (t_k, t_{k+1})
    long long j;   // offset of t inside the period
};

Grid locate(const SimulationRecord& rec, const LargeScaleSystem& sys, long long sample) {
    if (rec.x.empty() || rec.step <= 0) throw std::invalid_argument("proposition oracle: empty record");
    Grid g;
    g.h = rec.step;
    g.per = std::llround(sys.delta / rec.step);
    if (g.per < 2) throw std::invalid_argument("proposition oracle: need >= 2 substeps per sampling period");
    if (sample <= 0 || sample >= static_cast<long long>(rec.t.size()))
        throw std::invalid_argument("proposition oracle: sample outside record");
    if (std::abs(rec.t[1] - rec.t[0] - g.h) > 1e-9 * g.h)
        throw std::invalid_argument("proposition oracle: record must be dense (every substep)");
    g.k = sample / g.per;
    g.j = sample % g.per;
    if (g.j == 0) throw std::invalid_argument("proposition oracle: t must lie strictly inside (t_k, t_{k+1})");
    return g;
}

Vec sub_x(const SimulationRecord& rec, const LargeScaleSystem& sys, int i, long long idx) {
    return rec.x.at(idx).segment(sys.state_offset(i), sys.sub(i).n());
}

// Integral of x_i over grid indices [lo, hi].
Vec integral_x(const SimulationRecord& rec, const LargeScaleSystem& sys, int i, long long lo, long long hi, double h) {
    std::vector<Vec> f;
    for (long long q = lo; q <= hi; ++q) f.push_back(sub_x(rec, sys, i, q));
    return integrate_uniform(f, h);
}

} // namespace

Vec assemble_xi(const SimulationRecord& rec, const LargeScaleSystem& sys, int i, long long sample) {
    const Grid g = locate(rec, sys, sample);
    const int d = sys.sub(i).d(), n = sys.sub(i).n();
    if (g.k - d + 1 < 0 || sample - d * g.per < 0)
        throw std::invalid_argument("proposition oracle: window extends before t = 0");
    const long long ik = g.k * g.per;
    const long long iback = sample - d * g.per; // t - tau
    Vec xi(static_cast<Eigen::Index>((2 * d + 3) * n));
    int off = 0;
    auto put = [&](const Vec& v) {
        xi.segment(off, n) = v;
        off += n;
    };
    put(sub_x(rec, sys, i, sample));
    for (int v = 0; v < d; ++v) put(sub_x(rec, sys, i, ik - v * g.per));
    put(sub_x(rec, sys, i, iback));
    // Running integrals, most recent segment first.
    put((2.0 / (g.j * g.h)) * integral_x(rec, sys, i, ik, sample, g.h));
    for (int v = 1; v < d; ++v) {
        const long long hi = ik - (v - 1) * g.per, lo = hi - g.per;
        put((2.0 / sys.delta) * integral_x(rec, sys, i, lo, hi, g.h));
    }
    const long long last_hi = ik - (d - 1) * g.per;
    put((2.0 / ((last_hi - iback) * g.h)) * integral_x(rec, sys, i, iback, last_hi, g.h));
    return xi;
}

Prop1Result check_proposition1(const Prop1Input& in) {
    if (!in.rec || !in.sys) throw std::invalid_argument("check_proposition1: missing record/system");
    const auto& rec = *in.rec;
    const auto& sys = *in.sys;
    if (rec.xdot.size() != rec.x.size()) throw std::invalid_argument("check_proposition1: record lacks derivatives");
    const Grid g = locate(rec, sys, in.sample);
    const int d = sys.sub(in.i).d(), n = sys.sub(in.i).n();
    const double tau = sys.tau(in.i);
    const Vec xi = assemble_xi(rec, sys, in.i, in.sample);
    const double t = rec.t[in.sample];

    auto integrand = [&](long long q, const Vec& xd) {
        return std::exp(2.0 * in.alpha * (rec.t[q] - t)) * xd.dot(in.R * xd);
    };
    auto xdot = [&](long long q) { return Vec(rec.xdot.at(q).segment(sys.state_offset(in.i), n)); };
    // The recorded derivative at a sampling instant is the right limit (after the held
    // input switches). Pieces ending at a sampling instant need the left limit, which is
    // extrapolated from the interior points of the piece.
    auto piece = [&](long long lo, long long hi, bool closes_at_sample) {
        std::vector<double> f;
        for (long long q = lo; q <= hi; ++q) f.push_back(integrand(q, xdot(q)));
        if (closes_at_sample) {
            const long long p = hi - lo;
            Vec left;
            if (p >= 3)
                left = 3.0 * xdot(hi - 1) - 3.0 * xdot(hi - 2) + xdot(hi - 3);
            else if (p == 2)
                left = 2.0 * xdot(hi - 1) - xdot(hi - 2);
            else
                left = xdot(hi - 1);
            f.back() = integrand(hi, left);
        }
        return integrate_uniform(f, g.h);
    };
    const long long ik = g.k * g.per, iback = in.sample - d * g.per;
    double integral = piece(ik, in.sample, false);
    for (int v = 1; v < d; ++v) {
        const long long hi = ik - (v - 1) * g.per;
        integral += piece(hi - g.per, hi, true);
    }
    integral += piece(iback, ik - (d - 1) * g.per, true);

    Mat Rhat = Mat::Zero(2 * n, 2 * n);
    Rhat.topLeftCorner(n, n) = in.R;
    Rhat.bottomRightCorner(n, n) = 3.0 * in.R;
    const Mat Pb = build_Psi_bar(in.alpha, tau, build_Y(d, n), build_Psi(Rhat, in.G, d));
    Prop1Result r;
    r.lhs_integral = tau * integral;
    r.quad_form = xi.dot(Pb * xi);
    r.margin = {r.lhs_integral - r.quad_form, std::max(std::abs(r.lhs_integral), std::abs(r.quad_form))};
    return r;
}

// ---------------------------------------------------------------------------
// delta = Y xi
// ---------------------------------------------------------------------------

double delta_Y_residual(int d, int n, double Delta, double theta, std::uint64_t seed) {
    if (d < 1 || n < 1 || !(Delta > 0) || !(theta > 0 && theta < 1))
        throw std::invalid_argument("delta_Y_residual: bad arguments");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    // x(s) = c0 + c1 s + c2 s^2 + a sin(w s + phi), per component; exact antiderivative.
    struct Comp {
        double c0, c1, c2, a, w, phi;
    };
    std::vector<Comp> cs(n);
    for (auto& c : cs) c = {U(rng), U(rng) / Delta, U(rng) / (Delta * Delta), U(rng), (1.0 + 3.0 * std::abs(U(rng))) / Delta, U(rng) * 3.0};
    auto x = [&](double s) {
        Vec v(n);
        for (int r = 0; r < n; ++r) {
            const auto& c = cs[r];
            v[r] = c.c0 + c.c1 * s + c.c2 * s * s + c.a * std::sin(c.w * s + c.phi);
        }
        return v;
    };
    auto X = [&](double s) {
        Vec v(n);
        for (int r = 0; r < n; ++r) {
            const auto& c = cs[r];
            v[r] = c.c0 * s + c.c1 * s * s / 2 + c.c2 * s * s * s / 3 - c.a / c.w * std::cos(c.w * s + c.phi);
        }
        return v;
    };
    auto f_exact = [&](double p, double q) {
        Vec out(2 * n);
        out.head(n) = x(p) - x(q);
        out.tail(n) = x(p) + x(q) - (2.0 / (p - q)) * (X(p) - X(q));
        return out;
    };
    // Quadrature at step ~Delta/100.
    auto quad = [&](double lo, double hi) {
        int panels = std::max(2, static_cast<int>(std::ceil((hi - lo) / (Delta / 100.0))));
        if (panels % 2) ++panels;
        const double h = (hi - lo) / panels;
        std::vector<Vec> f;
        for (int k = 0; k <= panels; ++k) f.push_back(x(lo + k * h));
        return Vec(integrate_uniform(f, h));
    };

    const long long k = d + 1;
    auto tk = [&](long long m) { return m * Delta; };
    const double t = tk(k) + theta * Delta, tau = d * Delta;

    Vec xi((2 * d + 3) * n);
    int off = 0;
    auto put = [&](const Vec& v) {
        xi.segment(off, n) = v;
        off += n;
    };
    put(x(t));
    for (int v = 0; v < d; ++v) put(x(tk(k - v)));
    put(x(t - tau));
    put((2.0 / (t - tk(k))) * quad(tk(k), t));
    for (int v = 1; v < d; ++v) put((2.0 / Delta) * quad(tk(k - v), tk(k - v + 1)));
    put((2.0 / (tk(k - d + 1) - t + tau)) * quad(t - tau, tk(k - d + 1)));

    Vec delta(2 * (d + 1) * n);
    std::vector<double> pts{t};
    for (int v = 0; v < d; ++v) pts.push_back(tk(k - v));
    pts.push_back(t - tau);
    for (int v = 0; v <= d; ++v) delta.segment(2 * v * n, 2 * n) = f_exact(pts[v], pts[v + 1]);

    const Vec r = build_Y(d, n) * xi - delta;
    return r.norm() / std::max(1.0, delta.norm());
}

// ---------------------------------------------------------------------------
// Random data and sweeps
// ---------------------------------------------------------------------------

Mat random_psd(int n, std::mt19937_64& rng) {
    const Mat M = gaussian(n, n, rng);
    return M.transpose() * M + 1e-6 * Mat::Identity(n, n);
}

Mat random_G_for(const Mat& Rhat, std::mt19937_64& rng) {
    const Eigen::Index m = Rhat.rows();
    Mat G = gaussian(static_cast<int>(m), static_cast<int>(m), rng);
    G *= Rhat.norm() / std::max(G.norm(), 1e-300);
    Mat C(2 * m, 2 * m);
    for (int it = 0; it < 5000; ++it) {
        C << Rhat, G, G.transpose(), Rhat;
        if (min_eig_sym(C) >= 0) return G;
        G *= 0.99;
    }
    return Mat::Zero(m, m);
}

SweepSummary sweep_lemma1(int draws, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 3), deg(1, 5);
    SweepSummary s;
    for (int k = 0; k < draws; ++k) {
        const int n = dim(rng), p = deg(rng);
        const double a = U(rng), L = 0.1 + 1.9 * std::abs(U(rng));
        const Mat R = random_psd(n, rng);
        const Mat c = gaussian(n, p, rng);
        auto f = [&](double t) {
            Vec v = Vec::Zero(n);
            double pw = 1;
            for (int q = 0; q < p; ++q) v += c.col(q) * (pw *= (t - a));
            return v;
        };
        auto df = [&](double t) {
            Vec v = Vec::Zero(n);
            double pw = 1;
            for (int q = 0; q < p; ++q) {
                v += (q + 1) * c.col(q) * pw;
                pw *= (t - a);
            }
            return v;
        };
        const Margin m = check_lemma1(SampledFunction::from(f, df, a, a + L, 400), R);
        ++s.draws;
        s.worst_normalized = std::min(s.worst_normalized, m.normalized());
        if (m.margin < -tol * m.scale) ++s.failures;
    }
    return s;
}

SweepSummary sweep_lemma2(int draws, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 3);
    SweepSummary s;
    for (int k = 0; k < draws; ++k) {
        const int n = dim(rng);
        const double a = U(rng), L = 0.1 + 1.9 * std::abs(U(rng));
        const Mat R = random_psd(n, rng);
        const Mat c = gaussian(n, 4, rng);
        auto f = [&](double t) {
            const double u = t - a;
            return Vec(c.col(0) + u * c.col(1) + u * u * c.col(2) + u * u * u * c.col(3));
        };
        auto df = [&](double t) {
            const double u = t - a;
            return Vec(c.col(1) + 2 * u * c.col(2) + 3 * u * u * c.col(3));
        };
        const Margin m = check_lemma2(SampledFunction::from(f, df, a, a + L, 400), R);
        ++s.draws;
        s.worst_normalized = std::min(s.worst_normalized, m.normalized());
        if (m.margin < -tol * m.scale) ++s.failures;
    }
    return s;
}

SweepSummary sweep_lemma3(int draws, int d, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 2);
    SweepSummary s;
    for (int k = 0; k < draws; ++k) {
        const int n = dim(rng);
        const Mat R = random_psd(n, rng);
        Mat Rhat = Mat::Zero(2 * n, 2 * n);
        Rhat.topLeftCorner(n, n) = R;
        Rhat.bottomRightCorner(n, n) = 3.0 * R;
        const Mat G = random_G_for(Rhat, rng);
        std::vector<Vec> delta;
        for (int v = 0; v <= d; ++v) delta.push_back(gaussian(2 * n, 1, rng).col(0));
        std::vector<double> len;
        if (k % 2 == 0) {
            // Timings of the protocol: theta*Delta, Delta, ..., (1 - theta)*Delta.
            const double Delta = 1e-4 + U01(rng), th = 0.01 + 0.98 * U01(rng);
            len.push_back(th * Delta);
            for (int v = 1; v < d; ++v) len.push_back(Delta);
            len.push_back((1 - th) * Delta);
        } else {
            for (int v = 0; v <= d; ++v) len.push_back(1e-3 + U01(rng));
        }
        const Margin m = check_lemma3(delta, Rhat, G, len);
        ++s.draws;
        s.worst_normalized = std::min(s.worst_normalized, m.normalized());
        if (m.margin < -tol * m.scale) ++s.failures;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Invariance of gamma_min under the choice of T
// ---------------------------------------------------------------------------

bool TInvarianceReport::all_feasible() const {
    return ref_feasible && !feasible.empty() && std::all_of(feasible.begin(), feasible.end(), [](bool b) { return b; });
}

TInvarianceReport check_T_invariance(const LargeScaleSystem& sys, const SynthesisParams& params, int count,
                                     std::uint64_t seed, const SynthesisOptions& base, const SolverOptions& opts) {
    TInvarianceReport rep;
    const SynthesisResult ref = minimize_gamma(sys, params, base, opts);
    rep.ref_feasible = ref.feasible;
    rep.gamma_ref = ref.gamma;
    std::mt19937_64 rng(seed);
    double dev = 0;
    for (int c = 0; c < count; ++c) {
        SynthesisOptions so = base;
        so.T.clear();
        for (int i = 1; i <= sys.N(); ++i) {
            Mat T = random_alternative_T(sys.sub(i).B, rng);
            if (!satisfies_T_condition(T, sys.sub(i).B, 1e-8))
                throw std::logic_error("check_T_invariance: alternative T violates T B = [I; 0]");
            so.T.push_back(std::move(T));
        }
        const SynthesisResult r = minimize_gamma(sys, params, so, opts);
        rep.gammas.push_back(r.gamma);
        rep.feasible.push_back(r.feasible);
        rep.statuses.push_back(r.status);
        if (ref.feasible && r.feasible) dev = std::max(dev, std::abs(r.gamma - ref.gamma) / ref.gamma);
    }
    rep.max_rel_dev = ref.feasible ? dev : NAN;
    return rep;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

bool OracleSuiteReport::lemmas_pass() const {
    bool ok = lemma1.failures == 0 && lemma2.failures == 0 && lemma1.draws > 0 && lemma2.draws > 0;
    for (const auto& s : lemma3) ok = ok && s.failures == 0 && s.draws > 0;
    return ok && !lemma3.empty();
}

bool OracleSuiteReport::prop1_pass() const {
    if (prop1.empty()) return false;
    for (const auto& r : prop1)
        if (r.margin.margin < -1e-6 * r.margin.scale) return false;
    return true;
}

OracleSuiteReport run_oracle_suite(const LargeScaleSystem& sys, const std::vector<ControllerGains>& gains,
                                   double alpha, std::uint64_t seed, int draws, int prop1_points) {
    OracleSuiteReport rep;
    rep.lemma1 = sweep_lemma1(draws, seed * 7 + 1, rep.tol);
    rep.lemma2 = sweep_lemma2(draws, seed * 7 + 2, rep.tol);
    for (int d = 1; d <= 3; ++d) rep.lemma3.push_back(sweep_lemma3(draws, d, seed * 7 + 2 + d, rep.tol));

    for (int d = 1; d <= 3; ++d)
        for (double th : {0.05, 0.37, 0.5, 0.93}) {
            const double r = delta_Y_residual(d, 2, sys.delta, th, seed + 100 * d);
            rep.delta_Y.push_back(r);
            rep.delta_Y_max = std::max(rep.delta_Y_max, r);
        }

    // Dense closed-loop trajectory over a short window, excited by a smooth disturbance.
    int dmax = 1;
    for (const auto& s : sys.subsystems) dmax = std::max(dmax, s.d());
    SimulationOptions so;
    so.substeps = 10;
    so.auto_substeps = false;
    so.dense_record = true;
    so.record_derivative = true;
    DisturbanceSpec w;
    w.kind = DisturbanceKind::SeededRandomSmooth;
    w.seed = seed;
    w.t_off = 1.0;
    const double T = (40 + 2 * dmax) * sys.delta;
    const SimulationRecord rec = integrate_closed_loop(sys, gains, paper_initial_state(sys), w, T, so);
    rep.prop1_closed_loop = !gains.empty();
    if (rec.diverged) return rep;

    std::mt19937_64 rng(seed + 4242);
    const long long per = rec.substeps;
    std::uniform_int_distribution<int> pick_i(1, sys.N());
    for (int q = 0; q < prop1_points; ++q) {
        Prop1Input in;
        in.rec = &rec;
        in.sys = &sys;
        in.i = pick_i(rng);
        in.alpha = alpha;
        const long long first = static_cast<long long>(sys.sub(in.i).d() + 1) * per;
        std::uniform_int_distribution<long long> pick_s(first, static_cast<long long>(rec.t.size()) - 2);
        do in.sample = pick_s(rng);
        while (in.sample % per == 0);
        const int n = sys.sub(in.i).n();
        in.R = random_psd(n, rng);
        Mat Rhat = Mat::Zero(2 * n, 2 * n);
        Rhat.topLeftCorner(n, n) = in.R;
        Rhat.bottomRightCorner(n, n) = 3.0 * in.R;
        in.G = random_G_for(Rhat, rng);
        const Prop1Result r = check_proposition1(in);
        rep.prop1.push_back(r);
        rep.prop1_points.emplace_back(in.i, rec.t[in.sample]);
        rep.prop1_worst_normalized = std::min(rep.prop1_worst_normalized, r.margin.normalized());
    }
    return rep;
}

} // namespace rrlmi
