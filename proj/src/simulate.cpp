#include "rrlmi/simulate.hpp"

#include "rrlmi/protocol.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <iomanip>
#include <random>
#include <stdexcept>

namespace rrlmi {

std::string to_string(DisturbanceKind k) {
    switch (k) {
    case DisturbanceKind::Zero: return "zero";
    case DisturbanceKind::FinitePulse: return "finite-pulse";
    case DisturbanceKind::WindowedSine: return "windowed-sine";
    case DisturbanceKind::SeededRandomSmooth: return "seeded-random-smooth";
    }
    return "?";
}

DisturbanceKind disturbance_kind_from_string(const std::string& s) {
    if (s == "zero") return DisturbanceKind::Zero;
    if (s == "finite-pulse") return DisturbanceKind::FinitePulse;
    if (s == "windowed-sine") return DisturbanceKind::WindowedSine;
    if (s == "seeded-random-smooth") return DisturbanceKind::SeededRandomSmooth;
    throw ConfigError("unknown disturbance kind '" + s + "'");
}

double DisturbanceSpec::amp(int i) const {
    if (amplitude.empty()) return 1.0;
    if (amplitude.size() == 1) return amplitude[0];
    return amplitude.at(i - 1);
}

namespace {

std::vector<std::array<double, 3>> harmonics_for(std::uint64_t seed, int i, int channel, int count) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(channel)};
    std::mt19937_64 rng(sq);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> fr(0.02, 2.0), ph(0.0, 2.0 * M_PI);
    std::vector<std::array<double, 3>> out;
    for (int h = 0; h < count; ++h) {
        const double a = g(rng), f = fr(rng), phi = ph(rng);
        out.push_back({a, f, phi});
    }
    return out;
}

} // namespace

void DisturbanceSpec::prepare(const LargeScaleSystem& sys) {
    table.clear();
    if (kind != DisturbanceKind::SeededRandomSmooth) return;
    for (int i = 1; i <= sys.N(); ++i) {
        table.emplace_back();
        for (int c = 0; c < sys.sub(i).p(); ++c) table.back().push_back(harmonics_for(seed, i, c, harmonics));
    }
}

Vec DisturbanceSpec::eval(int i, int p, double t) const {
    Vec w = Vec::Zero(p);
    if (kind == DisturbanceKind::Zero || t < t_on || t >= t_off) return w;
    const double A = amp(i);
    const double len = t_off - t_on;
    const double hann = std::pow(std::sin(M_PI * (t - t_on) / len), 2);
    switch (kind) {
    case DisturbanceKind::FinitePulse: w.setConstant(A); break;
    case DisturbanceKind::WindowedSine: w.setConstant(A * std::sin(2.0 * M_PI * frequency * (t - t_on)) * hann); break;
    case DisturbanceKind::SeededRandomSmooth:
        for (int c = 0; c < p; ++c) {
            double s = 0;
            const auto hs = table.empty() ? harmonics_for(seed, i, c, harmonics) : table.at(i - 1).at(c);
            for (const auto& h : hs) s += h[0] * std::sin(2.0 * M_PI * h[1] * (t - t_on) + h[2]);
            w[c] = A * s * hann;
        }
        break;
    default: break;
    }
    return w;
}

std::vector<DisturbanceSpec> disturbance_family(int N, std::uint64_t seed, double t_on, double t_off) {
    std::vector<DisturbanceSpec> fam;
    for (int k = 0; k < 8; ++k) {
        DisturbanceSpec d;
        d.kind = DisturbanceKind::SeededRandomSmooth;
        d.seed = seed * 1000003ULL + static_cast<std::uint64_t>(k);
        d.t_on = t_on;
        d.t_off = t_off;
        d.amplitude = {1.0};
        fam.push_back(d);
    }
    DisturbanceSpec p;
    p.kind = DisturbanceKind::FinitePulse;
    p.t_on = t_on;
    p.t_off = t_off;
    p.amplitude = {1.0};
    fam.push_back(p); // all subsystems
    p.amplitude.assign(N, 0.0);
    p.amplitude[(N - 1) / 2] = 1.0;
    fam.push_back(p); // a single middle subsystem
    for (int i = 0; i < N; ++i) p.amplitude[i] = (i % 2 == 0) ? 1.0 : -1.0;
    fam.push_back(p); // alternating signs
    p.amplitude = {1.0};
    p.t_off = t_on + 0.1 * (t_off - t_on);
    fam.push_back(p); // short pulse
    return fam;
}

double SimulationRecord::total_zz() const {
    double s = 0;
    for (double v : zz) s += v;
    return s;
}

double SimulationRecord::total_ww() const {
    double s = 0;
    for (double v : ww) s += v;
    return s;
}

namespace {
template <class F> std::vector<int> offsets(const LargeScaleSystem& sys, F dim) {
    std::vector<int> o{0};
    for (const auto& s : sys.subsystems) o.push_back(o.back() + dim(s));
    return o;
}
} // namespace

std::vector<int> output_offsets(const LargeScaleSystem& sys) {
    return offsets(sys, [](const SubsystemModel& s) { return s.q(); });
}
std::vector<int> input_offsets(const LargeScaleSystem& sys) {
    return offsets(sys, [](const SubsystemModel& s) { return s.m(); });
}
std::vector<int> disturbance_offsets(const LargeScaleSystem& sys) {
    return offsets(sys, [](const SubsystemModel& s) { return s.p(); });
}

std::vector<Vec> paper_initial_state(const LargeScaleSystem& sys) {
    std::vector<Vec> x0;
    for (int i = 1; i <= sys.N(); ++i) {
        if (sys.sub(i).n() != 2) throw ConfigError("paper initial state needs n_i = 2");
        x0.push_back((Vec(2) << 1.0 - 2.0 * i, 2.0 * i).finished());
    }
    return x0;
}

std::vector<Vec> zero_state(const LargeScaleSystem& sys) {
    std::vector<Vec> x0;
    for (const auto& s : sys.subsystems) x0.push_back(Vec::Zero(s.n()));
    return x0;
}

double default_horizon(const DisturbanceSpec& dist, const SynthesisParams& params) {
    const double amin = *std::min_element(params.alpha.begin(), params.alpha.end());
    const double t_off = dist.kind == DisturbanceKind::Zero ? 0.0 : dist.t_off;
    return t_off + 20.0 / amin;
}

SimulationRecord integrate_closed_loop(const LargeScaleSystem& sys, const std::vector<ControllerGains>& gains,
                                       const std::vector<Vec>& x0, const DisturbanceSpec& dist_in, double T_end,
                                       const SimulationOptions& opts) {
    require_valid(sys);
    DisturbanceSpec dist = dist_in;
    dist.prepare(sys);
    if (opts.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    if (!gains.empty() && static_cast<int>(gains.size()) != sys.N())
        throw std::invalid_argument("need gains for every subsystem");
    if (static_cast<int>(x0.size()) != sys.N()) throw std::invalid_argument("initial state per subsystem required");
    const int N = sys.N();
    const int nt = sys.total_states();
    std::vector<int> xo(N + 1);
    for (int i = 1; i <= N; ++i) xo[i] = sys.state_offset(i);
    xo[0] = 0;
    const auto zo = output_offsets(sys), uo = input_offsets(sys), wo = disturbance_offsets(sys);

    // Closed-loop matrix acting on the live state (own feedback + physical coupling).
    std::vector<Eigen::Triplet<double>> trip;
    double rho = 0; // spectral radius of the block diagonal, for the RK4 stability limit
    for (int i = 1; i <= N; ++i) {
        const auto& s = sys.sub(i);
        Mat Aii = s.A;
        if (!gains.empty()) Aii += s.B * gains[i - 1].Kii;
        rho = std::max(rho, Eigen::EigenSolver<Mat>(Aii, false).eigenvalues().cwiseAbs().maxCoeff());
        for (int r = 0; r < s.n(); ++r)
            for (int c = 0; c < s.n(); ++c)
                if (Aii(r, c) != 0.0) trip.emplace_back(xo[i] + r, xo[i] + c, Aii(r, c));
        for (const auto& cp : s.couplings)
            for (int r = 0; r < s.n(); ++r)
                for (int c = 0; c < cp.Aij.cols(); ++c)
                    if (cp.Aij(r, c) != 0.0) trip.emplace_back(xo[i] + r, xo[cp.j] + c, cp.Aij(r, c));
    }
    Eigen::SparseMatrix<double> Acl(nt, nt);
    Acl.setFromTriplets(trip.begin(), trip.end());

    auto stack = [&](const std::vector<Vec>& parts) {
        Vec v(nt);
        for (int i = 1; i <= N; ++i) v.segment(xo[i], sys.sub(i).n()) = parts[i - 1];
        return v;
    };
    auto split = [&](const Vec& v) {
        std::vector<Vec> parts;
        for (int i = 1; i <= N; ++i) parts.push_back(v.segment(xo[i], sys.sub(i).n()));
        return parts;
    };
    auto Ew = [&](double t, Vec* wout) {
        Vec e = Vec::Zero(nt);
        for (int i = 1; i <= N; ++i) {
            const auto& s = sys.sub(i);
            const Vec w = dist.eval(i, s.p(), t);
            if (wout) wout->segment(wo[i - 1], s.p()) = w;
            e.segment(xo[i], s.n()) = s.E * w;
        }
        return e;
    };
    // u_i's neighbour part from held samples, constant over a sampling interval.
    auto held_input = [&](const RoundRobinState& st, std::vector<Vec>& uh) {
        uh.assign(N, Vec());
        for (int i = 1; i <= N; ++i) {
            const auto& s = sys.sub(i);
            uh[i - 1] = Vec::Zero(s.m());
            if (gains.empty()) continue;
            for (size_t r = 0; r < st.held[i - 1].size(); ++r) {
                const auto& hs = st.held[i - 1][r];
                for (const auto& kij : gains[i - 1].Kij)
                    if (kij.j == hs.j) uh[i - 1] += kij.Aij * hs.x;
            }
        }
    };

    SimulationRecord rec;
    int substeps = opts.substeps;
    if (opts.auto_substeps) {
        // RK4 is stable for |lambda| dt below ~2.78; keep a margin.
        const double need = std::ceil(sys.delta * rho / 2.0);
        if (need > substeps) substeps = static_cast<int>(std::min(need, 100000.0));
    }
    rec.substeps = substeps;
    const double dt = sys.delta / substeps;
    rec.step = dt;
    const long long K = std::max(1LL, static_cast<long long>(std::llround(T_end / sys.delta)));
    rec.zz.assign(N, 0.0);
    rec.ww.assign(N, 0.0);
    const double t_tail = 0.9 * K * sys.delta;
    double tail_zz = 0;

    Vec x = stack(x0);
    RoundRobinState st = RoundRobinState::initial(sys, x0);
    std::vector<Vec> uh;
    held_input(st, uh);
    Vec hvec = Vec::Zero(nt);

    auto set_hvec = [&]() {
        for (int i = 1; i <= N; ++i) hvec.segment(xo[i], sys.sub(i).n()) = sys.sub(i).B * uh[i - 1];
    };
    set_hvec();

    // Per-subsystem instantaneous energy densities z'z and w'w.
    auto densities = [&](const Vec& xs, double t, std::vector<double>& zz, std::vector<double>& ww) {
        for (int i = 1; i <= N; ++i) {
            const auto& s = sys.sub(i);
            const Vec w = dist.eval(i, s.p(), t);
            const Vec z = s.C * xs.segment(xo[i], s.n()) + s.F * w;
            zz[i - 1] = z.squaredNorm();
            ww[i - 1] = w.squaredNorm();
        }
    };
    auto record = [&](double t) {
        Vec w(wo.back()), u(uo.back()), z(zo.back());
        const Vec e = Ew(t, &w);
        for (int i = 1; i <= N; ++i) {
            const auto& s = sys.sub(i);
            Vec ui = uh[i - 1];
            if (!gains.empty()) ui += gains[i - 1].Kii * x.segment(xo[i], s.n());
            u.segment(uo[i - 1], s.m()) = ui;
            z.segment(zo[i - 1], s.q()) = s.C * x.segment(xo[i], s.n()) + s.F * w.segment(wo[i - 1], s.p());
        }
        rec.t.push_back(t);
        rec.x.push_back(x);
        rec.u.push_back(u);
        rec.z.push_back(z);
        rec.w.push_back(w);
        if (opts.record_derivative) rec.xdot.push_back(Acl * x + hvec + e);
    };
    auto audit = [&](long long k) {
        if (k >= opts.audit_steps) return;
        for (int i = 1; i <= N; ++i)
            for (const auto& hs : st.held[i - 1]) rec.audit.push_back({k, i, hs.j, hs.step});
    };

    std::vector<double> zz0(N), ww0(N), zz1(N), ww1(N);
    densities(x, 0.0, zz0, ww0);
    audit(0);
    record(0.0);
    for (long long k = 0; k < K; ++k) {
        const double tk = k * sys.delta;
        if (k > 0) {
            st = advance(st, sys, split(x));
            held_input(st, uh);
            set_hvec();
            audit(k);
            if (k % opts.record_stride == 0) record(tk);
        }
        for (int sidx = 0; sidx < substeps; ++sidx) {
            const double t = tk + sidx * dt;
            const Vec k1 = Acl * x + hvec + Ew(t, nullptr);
            const Vec k2 = Acl * (x + 0.5 * dt * k1) + hvec + Ew(t + 0.5 * dt, nullptr);
            const Vec k3 = Acl * (x + 0.5 * dt * k2) + hvec + Ew(t + 0.5 * dt, nullptr);
            const Vec k4 = Acl * (x + dt * k3) + hvec + Ew(t + dt, nullptr);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double tn = t + dt;
            densities(x, tn, zz1, ww1);
            for (int i = 0; i < N; ++i) {
                const double dz = 0.5 * dt * (zz0[i] + zz1[i]);
                rec.zz[i] += dz;
                rec.ww[i] += 0.5 * dt * (ww0[i] + ww1[i]);
                if (tn > t_tail) tail_zz += dz;
            }
            std::swap(zz0, zz1);
            std::swap(ww0, ww1);
            if (opts.dense_record && sidx + 1 < substeps) record(tn);
            if (!x.allFinite() || x.norm() > opts.blowup_guard) {
                rec.diverged = true;
                rec.diverged_at = tn;
                record(tn);
                rec.steps = k + 1;
                rec.transmissions = st.transmissions;
                return rec;
            }
        }
    }
    const double tend = K * sys.delta;
    if (rec.t.back() != tend) record(tend);
    rec.steps = K;
    rec.transmissions = st.transmissions;
    const double tot = rec.total_zz();
    rec.tail_fraction = tot > 0 ? tail_zz / tot : 0.0;
    return rec;
}

double l2_ratio(const SimulationRecord& r) {
    const double ww = r.total_ww();
    if (!(ww > 0)) throw std::invalid_argument("empirical_l2_gain: zero disturbance energy");
    return std::sqrt(r.total_zz() / ww);
}

GainEstimate empirical_l2_gain(const std::vector<SimulationRecord>& records) {
    GainEstimate g;
    for (const auto& r : records) {
        g.ratios.push_back(l2_ratio(r));
        g.gain = std::max(g.gain, g.ratios.back());
        g.worst_tail_fraction = std::max(g.worst_tail_fraction, r.tail_fraction);
    }
    return g;
}

double decay_estimate(const SimulationRecord& r) {
    if (r.t.size() < 4) throw std::invalid_argument("decay_estimate: record too short");
    const double tmid = 0.5 * r.t.back();
    double st = 0, sl = 0, stt = 0, stl = 0;
    int n = 0;
    for (size_t k = 0; k < r.t.size(); ++k) {
        if (r.t[k] < tmid) continue;
        const double nx = r.x[k].norm();
        if (!(nx > 1e-280)) continue;
        const double l = std::log(nx);
        st += r.t[k];
        sl += l;
        stt += r.t[k] * r.t[k];
        stl += r.t[k] * l;
        ++n;
    }
    if (n < 3)
        throw std::runtime_error("decay_estimate: trajectory is below the floating-point floor over the tail; "
                                 "retry with a shorter horizon");
    return (n * stl - st * sl) / (n * stt - st * st);
}

void write_trajectories_csv(std::ostream& os, const LargeScaleSystem& sys, const SimulationRecord& r) {
    os << "t";
    for (int i = 1; i <= sys.N(); ++i)
        for (int c = 0; c < sys.sub(i).n(); ++c) os << ",x" << i << "_" << c + 1;
    for (int i = 1; i <= sys.N(); ++i)
        for (int c = 0; c < sys.sub(i).m(); ++c) os << ",u" << i << "_" << c + 1;
    for (int i = 1; i <= sys.N(); ++i)
        for (int c = 0; c < sys.sub(i).q(); ++c) os << ",z" << i << "_" << c + 1;
    for (int i = 1; i <= sys.N(); ++i)
        for (int c = 0; c < sys.sub(i).p(); ++c) os << ",w" << i << "_" << c + 1;
    os << "\n" << std::setprecision(12);
    for (size_t k = 0; k < r.t.size(); ++k) {
        os << r.t[k];
        for (const Vec* v : {&r.x[k], &r.u[k], &r.z[k], &r.w[k]})
            for (Eigen::Index c = 0; c < v->size(); ++c) os << "," << (*v)[c];
        os << "\n";
    }
}

} // namespace rrlmi
