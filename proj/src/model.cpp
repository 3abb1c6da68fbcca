#include "rrlmi/model.hpp"

#include <Eigen/Eigenvalues>

#include <set>
#include <sstream>

namespace rrlmi {

std::vector<int> SubsystemModel::neighbors() const {
    std::vector<int> out;
    out.reserve(couplings.size());
    for (const auto& c : couplings) out.push_back(c.j);
    return out;
}

int LargeScaleSystem::total_states() const {
    int s = 0;
    for (const auto& sb : subsystems) s += sb.n();
    return s;
}

int LargeScaleSystem::coupled_states(int i) const {
    int s = 0;
    for (const auto& c : sub(i).couplings) s += sub(c.j).n();
    return s;
}

int LargeScaleSystem::state_offset(int i) const {
    int s = 0;
    for (int k = 1; k < i; ++k) s += sub(k).n();
    return s;
}

namespace {

std::string dims(const Mat& M) {
    std::ostringstream os;
    os << M.rows() << "x" << M.cols();
    return os.str();
}

void check_shape(std::vector<Violation>& out, int i, const char* name, const Mat& M, Eigen::Index r,
                 Eigen::Index c) {
    if (M.rows() != r || M.cols() != c)
        out.push_back({i, std::string(name) + " has shape " + dims(M) + ", expected " +
                              std::to_string(r) + "x" + std::to_string(c)});
}

} // namespace

std::vector<Violation> validate_system(const LargeScaleSystem& sys) {
    std::vector<Violation> out;
    if (!(sys.delta > 0)) out.push_back({0, "sampling period delta must be positive"});
    if (sys.N() == 0) {
        out.push_back({0, "system has no subsystems"});
        return out;
    }
    const int N = sys.N();
    for (int i = 1; i <= N; ++i) {
        const auto& s = sys.sub(i);
        if (s.index != i) out.push_back({i, "subsystem index field is " + std::to_string(s.index)});
        const int n = s.n();
        if (n == 0 || s.A.cols() != n) {
            out.push_back({i, "A must be square and nonempty, got " + dims(s.A)});
            continue;
        }
        if (s.B.rows() != n) out.push_back({i, "B row count " + std::to_string(s.B.rows()) + " != n"});
        if (s.m() > n) out.push_back({i, "m > n (more inputs than states)"});
        if (s.B.rows() == n && s.m() > 0) {
            Eigen::FullPivLU<Mat> lu(s.B);
            lu.setThreshold(1e-12);
            if (lu.rank() < s.m()) out.push_back({i, "B not full column rank"});
        }
        if (s.m() == 0) out.push_back({i, "B has no columns"});
        if (s.E.rows() != n) out.push_back({i, "E row count != n"});
        if (s.C.cols() != n) out.push_back({i, "C column count != n"});
        check_shape(out, i, "F", s.F, s.C.rows(), s.E.cols());
        if (s.d() == 0) out.push_back({i, "no neighbors (d_i = 0 is not supported by the protocol)"});

        std::set<int> seen;
        for (const auto& c : s.couplings) {
            if (c.j < 1 || c.j > N) {
                out.push_back({i, "neighbor index " + std::to_string(c.j) + " out of range"});
                continue;
            }
            if (c.j == i) out.push_back({i, "self-loop in neighbor set"});
            if (!seen.insert(c.j).second) out.push_back({i, "duplicate neighbor " + std::to_string(c.j)});
            check_shape(out, i, ("A_" + std::to_string(i) + "," + std::to_string(c.j)).c_str(), c.Aij, n,
                        sys.sub(c.j).n());
        }
    }
    return out;
}

void require_valid(const LargeScaleSystem& sys) {
    auto v = validate_system(sys);
    if (v.empty()) return;
    std::ostringstream os;
    os << "invalid system:";
    for (const auto& x : v) os << "\n  [" << x.subsystem << "] " << x.message;
    throw ConfigError(os.str());
}

LargeScaleSystem build_chain_system(int N, const SubsystemMaker& maker, double delta) {
    if (N < 2) throw ConfigError("chain needs N >= 2");
    LargeScaleSystem sys;
    sys.delta = delta;
    for (int i = 1; i <= N; ++i) {
        std::vector<int> nb;
        if (i > 1) nb.push_back(i - 1);
        if (i < N) nb.push_back(i + 1);
        SubsystemModel s = maker(i, nb);
        s.index = i;
        sys.subsystems.push_back(std::move(s));
    }
    return sys;
}

LargeScaleSystem example2_system(double a, int N, double delta) {
    Mat Aa(2, 2), Ab(2, 2);
    Aa << -0.7 + a, -0.1, 0.0, -0.8 + 0.1 * a;
    Ab << -0.2, -0.1 + 0.2 * a, 0.0, -0.1;
    return build_chain_system(
        N,
        [&](int i, const std::vector<int>& nb) {
            SubsystemModel s;
            s.index = i;
            s.A = Aa + static_cast<double>(nb.size()) * Ab;
            s.B = (Mat(2, 1) << -0.4, 0.1).finished();
            s.E = (Mat(2, 1) << 0.1, -0.2).finished();
            s.C = (Mat(1, 2) << 0.1, 0.0).finished();
            s.F = Mat::Constant(1, 1, 2.0);
            for (int j : nb) s.couplings.push_back({j, -Ab});
            return s;
        },
        delta);
}

LargeScaleSystem example4_system(int N, double delta) {
    return build_chain_system(
        N,
        [](int i, const std::vector<int>& nb) {
            SubsystemModel s;
            s.index = i;
            const double di = i;
            s.A.resize(2, 2);
            // The i = 4m-1 subsystems carry the unstable diagonal entry.
            const double a11 = (i % 4 == 3) ? (2 + i % 3) / 10.0 : (i % 3 - 20) / 10.0;
            s.A << a11, di / (5 * di + 1), 0.0, (i % 4 - 15) / 10.0;
            Mat Aij(2, 2);
            Aij << (i % 3) / 10.0, (i % 4) / 10.0, 0.0, 0.1;
            s.B = (Mat(2, 1) << -0.4, 0.1).finished();
            s.E = (Mat(2, 1) << (i % 6) / 10.0, 0.0).finished();
            s.C = (Mat(1, 2) << (i % 5) / 10.0, 0.1).finished();
            s.F = Mat::Constant(1, 1, (i % 8) / 10.0);
            for (int j : nb) s.couplings.push_back({j, Aij});
            return s;
        },
        delta);
}

Mat assemble_open_loop_A(const LargeScaleSystem& sys) {
    const int nt = sys.total_states();
    Mat A = Mat::Zero(nt, nt);
    for (int i = 1; i <= sys.N(); ++i) {
        const auto& s = sys.sub(i);
        const int oi = sys.state_offset(i);
        A.block(oi, oi, s.n(), s.n()) = s.A;
        for (const auto& c : s.couplings) A.block(oi, sys.state_offset(c.j), s.n(), c.Aij.cols()) += c.Aij;
    }
    return A;
}

int count_unstable_eigenvalues(const Mat& A, double tol) {
    Eigen::EigenSolver<Mat> es(A, false);
    int k = 0;
    for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r)
        if (es.eigenvalues()[r].real() > tol) ++k;
    return k;
}

SynthesisParams SynthesisParams::uniform(int N, double alpha, double h, double eps) {
    SynthesisParams p;
    p.alpha.assign(N, alpha);
    p.h.assign(N, h);
    p.eps = eps;
    return p;
}

std::vector<Violation> validate_params(const LargeScaleSystem& sys, const SynthesisParams& prm) {
    std::vector<Violation> out;
    const int N = sys.N();
    if (static_cast<int>(prm.alpha.size()) != N || static_cast<int>(prm.h.size()) != N) {
        out.push_back({0, "alpha/h must have one entry per subsystem"});
        return out;
    }
    if (!(prm.eps > 0)) out.push_back({0, "strictness eps must be positive"});
    if (!prm.minimize && !(prm.gamma > 0)) out.push_back({0, "fixed gamma must be positive"});
    for (int i = 1; i <= N; ++i) {
        const double a = prm.alpha[i - 1], h = prm.h[i - 1];
        const int d = sys.sub(i).d();
        if (!(a > 0)) out.push_back({i, "alpha must be positive"});
        if (!(h > 0)) out.push_back({i, "h must be positive"});
        if (d > 0 && !(h < 2.0 * a / d))
            out.push_back({i, "h_i must satisfy h_i < 2 alpha_i / d_i (got h=" + std::to_string(h) +
                                  ", bound=" + std::to_string(2.0 * a / d) + ")"});
    }
    return out;
}

} // namespace rrlmi
