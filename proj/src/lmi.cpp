#include "rrlmi/lmi.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace rrlmi {

// ---------------------------------------------------------------------------
// Variable layout
// ---------------------------------------------------------------------------

int VariableLayout::add(const std::string& name, int subsystem, int rows, int cols, bool symmetric) {
    if (has(subsystem, name)) throw std::logic_error("duplicate variable " + name);
    if (symmetric && rows != cols) throw std::logic_error("symmetric variable must be square: " + name);
    VarBlock b{name, subsystem, rows, cols, symmetric, total_, symmetric ? rows * (rows + 1) / 2 : rows * cols};
    total_ += b.size;
    blocks_.push_back(b);
    return b.offset;
}

bool VariableLayout::has(int subsystem, const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.subsystem == subsystem && b.name == name) return true;
    return false;
}

const VarBlock& VariableLayout::find(int subsystem, const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.subsystem == subsystem && b.name == name) return b;
    throw std::out_of_range("no variable " + name + " for subsystem " + std::to_string(subsystem));
}

AffineMat VariableLayout::mat(int subsystem, const std::string& name) const {
    const VarBlock& b = find(subsystem, name);
    AffineMat out(b.rows, b.cols);
    int k = b.offset;
    if (b.symmetric) {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r <= c; ++r) {
                Mat u = Mat::Zero(b.rows, b.cols);
                u(r, c) = 1.0;
                u(c, r) = 1.0;
                out.add_term(k++, u);
            }
    } else {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r < b.rows; ++r) {
                Mat u = Mat::Zero(b.rows, b.cols);
                u(r, c) = 1.0;
                out.add_term(k++, u);
            }
    }
    return out;
}

Mat VariableLayout::value(int subsystem, const std::string& name, const Vec& y) const {
    const VarBlock& b = find(subsystem, name);
    Mat v(b.rows, b.cols);
    int k = b.offset;
    if (b.symmetric) {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r <= c; ++r) v(r, c) = v(c, r) = y[k++];
    } else {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r < b.rows; ++r) v(r, c) = y[k++];
    }
    return v;
}

void VariableLayout::set(int subsystem, const std::string& name, const Mat& value, Vec& y) const {
    const VarBlock& b = find(subsystem, name);
    if (value.rows() != b.rows || value.cols() != b.cols) throw std::invalid_argument("set: shape mismatch " + name);
    int k = b.offset;
    if (b.symmetric) {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r <= c; ++r) y[k++] = 0.5 * (value(r, c) + value(c, r));
    } else {
        for (int c = 0; c < b.cols; ++c)
            for (int r = 0; r < b.rows; ++r) y[k++] = value(r, c);
    }
}

std::string VariableLayout::describe(int index) const {
    for (const auto& b : blocks_)
        if (index >= b.offset && index < b.offset + b.size)
            return b.name + "_" + std::to_string(b.subsystem) + "[" + std::to_string(index - b.offset) + "]";
    return "?";
}

std::string to_string(MultiplierStructure s) { return s == MultiplierStructure::SharedU ? "shared-U" : "zero-top"; }

MultiplierStructure multiplier_structure_from_string(const std::string& s) {
    if (s == "shared-U" || s == "shared") return MultiplierStructure::SharedU;
    if (s == "zero-top") return MultiplierStructure::ZeroTop;
    throw ConfigError("unknown multiplier structure '" + s + "' (expected shared-U or zero-top)");
}

VariableLayout build_layout(const LargeScaleSystem& sys, bool gamma_variable) {
    VariableLayout L;
    for (int i = 1; i <= sys.N(); ++i) {
        const auto& s = sys.sub(i);
        const int n = s.n(), m = s.m(), nc = sys.coupled_states(i);
        for (const char* nm : {"P", "Q", "R", "W"}) L.add(nm, i, n, n, true);
        L.add("G", i, 2 * n, 2 * n, false);
        L.add("U", i, m, m, false);
        for (const char* nm : {"L", "H"}) {
            L.add(std::string(nm) + "21", i, n - m, m, false);
            L.add(std::string(nm) + "22", i, n - m, n - m, false);
        }
        for (const char* nm : {"M", "N"}) {
            L.add(std::string(nm) + "21", i, n - m, m, false);
            L.add(std::string(nm) + "22", i, n - m, nc - m, false);
        }
        L.add("X", i, m, n, false);
        L.add("Z", i, m, nc, false);
    }
    if (gamma_variable) L.add("s", 0, 1, 1, false);
    return L;
}

// ---------------------------------------------------------------------------
// T, Y, Psi
// ---------------------------------------------------------------------------

Mat build_T(const Mat& B) {
    const Eigen::Index n = B.rows(), m = B.cols();
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    if (m == 0 || m > n || sv(m - 1) <= 1e-12 * std::max(1.0, sv(0)))
        throw std::invalid_argument("build_T: B must have full column rank");
    Mat T(n, n);
    T.topRows(m) = (B.transpose() * B).ldlt().solve(B.transpose());
    // Left singular vectors beyond rank m span null(B^T).
    Mat nullB = svd.matrixU().rightCols(n - m).transpose();
    for (Eigen::Index r = 0; r < nullB.rows(); ++r) {
        Eigen::Index idx;
        nullB.row(r).cwiseAbs().maxCoeff(&idx);
        if (nullB(r, idx) < 0) nullB.row(r) *= -1.0;
    }
    T.bottomRows(n - m) = nullB;
    return T;
}

Mat random_alternative_T(const Mat& B, std::mt19937_64& rng) {
    const Eigen::Index n = B.rows(), m = B.cols();
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    Mat S = Mat::Identity(n, n);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = m; c < n; ++c) S(r, c) = g(rng);
    Mat C2 = Mat::Identity(n - m, n - m) * scale(rng);
    for (Eigen::Index r = 0; r < n - m; ++r)
        for (Eigen::Index c = 0; c < n - m; ++c) C2(r, c) += 0.3 * g(rng);
    S.bottomRightCorner(n - m, n - m) = C2;
    return S * build_T(B);
}

bool satisfies_T_condition(const Mat& T, const Mat& B, double tol) {
    if (T.rows() != B.rows() || T.cols() != B.rows()) return false;
    const Eigen::Index n = B.rows(), m = B.cols();
    Mat target = Mat::Zero(n, m);
    target.topRows(m).setIdentity();
    if ((T * B - target).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::JacobiSVD<Mat> svd(T);
    const auto& sv = svd.singularValues();
    return sv(n - 1) > 1e-12 * sv(0);
}

Mat build_Y(int d, int n) {
    if (d < 1) throw std::invalid_argument("build_Y: d must be >= 1");
    const int rows = 2 * (d + 1), cols = 2 * d + 3;
    Mat Y = Mat::Zero(rows * n, cols * n);
    const Mat I = Mat::Identity(n, n);
    auto put = [&](int r, int c, double s) { Y.block(r * n, c * n, n, n) += s * I; };
    // Segment endpoints in xi order: x(t), x(t_k) ... x(t_{k-d+1}), x(t - tau).
    for (int v = 0; v <= d; ++v) {
        const int p = v, q = v + 1;
        put(2 * v, p, 1.0);
        put(2 * v, q, -1.0);
        put(2 * v + 1, p, 1.0);
        put(2 * v + 1, q, 1.0);
        put(2 * v + 1, d + 2 + v, -1.0);
    }
    return Y;
}

AffineMat rhat_of(const AffineMat& R) {
    const auto n = R.rows();
    std::vector<std::vector<AffineMat>> g{{R, AffineMat()}, {AffineMat(), 3.0 * R}};
    return AffineMat::blocks(g, {n, n}, {n, n});
}

AffineMat build_Psi(const AffineMat& Rhat, const AffineMat& G, int d) {
    if (Rhat.rows() != Rhat.cols() || G.rows() != Rhat.rows() || G.cols() != Rhat.cols())
        throw std::invalid_argument("build_Psi: dimension mismatch");
    const AffineMat Gs = symmetric_part(G);
    const int K = d + 1;
    std::vector<std::vector<AffineMat>> grid(K, std::vector<AffineMat>(K));
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) grid[a][b] = a == b ? Rhat : Gs;
    std::vector<Eigen::Index> sz(K, Rhat.rows());
    return AffineMat::blocks(grid, sz, sz);
}

Mat build_Psi(const Mat& Rhat, const Mat& G, int d) { return build_Psi(AffineMat(Rhat), AffineMat(G), d).constant(); }

AffineMat build_Psi_bar(double alpha, double tau, const Mat& Y, const AffineMat& Psi) {
    if (Psi.rows() != Y.rows()) throw std::invalid_argument("build_Psi_bar: Y/Psi mismatch");
    return std::exp(-2.0 * alpha * tau) * (Mat(Y.transpose()) * Psi * Y);
}

Mat build_Psi_bar(double alpha, double tau, const Mat& Y, const Mat& Psi) {
    return build_Psi_bar(alpha, tau, Y, AffineMat(Psi)).constant();
}

std::vector<Eigen::Index> psi_bar_partition(int d, int n) { return {n, d * n, n, (d + 1) * n}; }

namespace {
Eigen::Index part_offset(int d, int n, int u) {
    auto sz = psi_bar_partition(d, n);
    Eigen::Index o = 0;
    for (int k = 0; k < u; ++k) o += sz[k];
    return o;
}
} // namespace

AffineMat psi_bar_block(const AffineMat& Pb, int d, int n, int u, int v) {
    auto sz = psi_bar_partition(d, n);
    return Pb.block(part_offset(d, n, u), part_offset(d, n, v), sz[u], sz[v]);
}

Mat psi_bar_block(const Mat& Pb, int d, int n, int u, int v) {
    auto sz = psi_bar_partition(d, n);
    return Pb.block(part_offset(d, n, u), part_offset(d, n, v), sz[u], sz[v]);
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

AffinePsdConstraint assemble_condition5(int i, const LargeScaleSystem& sys, const VariableLayout& layout) {
    const int n = sys.sub(i).n();
    const AffineMat Rh = rhat_of(layout.mat(i, "R"));
    const AffineMat G = layout.mat(i, "G");
    std::vector<std::vector<AffineMat>> g{{Rh, G}, {G.transpose(), Rh}};
    AffinePsdConstraint c;
    c.label = "Cond5_" + std::to_string(i);
    c.subsystem = i;
    c.expr = AffineMat::blocks(g, {2 * n, 2 * n}, {2 * n, 2 * n});
    return c;
}

std::vector<Eigen::Index> theta_block_sizes(int i, const LargeScaleSystem& sys) {
    const auto& s = sys.sub(i);
    const int n = s.n(), d = s.d(), nc = sys.coupled_states(i);
    return {n, n, d * n, n, (d + 1) * n, nc, nc, s.p()};
}

namespace {

// [top; bottom] where top = [U 0] (or zeros) and bottom = [B21 B22].
AffineMat structured(const VariableLayout& L, int i, const std::string& nm, int n, int m, int cols, bool top_U) {
    AffineMat top(m, cols);
    if (top_U) {
        std::vector<std::vector<AffineMat>> g{{L.mat(i, "U"), AffineMat()}};
        top = AffineMat::blocks(g, {m}, {m, cols - m});
    }
    if (n == m) return top;
    std::vector<std::vector<AffineMat>> g{{top}, {AffineMat::blocks({{L.mat(i, nm + "21"), L.mat(i, nm + "22")}},
                                                                    {n - m}, {m, cols - m})}};
    return AffineMat::blocks(g, {m, n - m}, {cols});
}

// [V; 0] with `rows` rows.
AffineMat pad_rows(const AffineMat& V, Eigen::Index rows) {
    if (rows == V.rows()) return V;
    std::vector<std::vector<AffineMat>> g{{V}, {AffineMat::zero(rows - V.rows(), V.cols())}};
    return AffineMat::blocks(g, {V.rows(), rows - V.rows()}, {V.cols()});
}

} // namespace

AffinePsdConstraint assemble_Theta(int i, const ThetaContext& ctx, const Mat& T) {
    const LargeScaleSystem& sys = *ctx.sys;
    const SynthesisParams& prm = *ctx.params;
    const VariableLayout& Lay = *ctx.layout;
    const auto& sb = sys.sub(i);
    const int n = sb.n(), m = sb.m(), d = sb.d(), p = sb.p(), nc = sys.coupled_states(i);
    if (!satisfies_T_condition(T, sb.B, 1e-8))
        throw std::invalid_argument("assemble_Theta: T does not satisfy T B = [I; 0] for subsystem " +
                                    std::to_string(i));
    const bool shared = ctx.structure == MultiplierStructure::SharedU;
    const double alpha = prm.alpha[i - 1];
    const double tau = sys.tau(i);

    Mat Abar(n, nc);
    {
        int o = 0;
        for (const auto& c : sb.couplings) {
            Abar.block(0, o, n, c.Aij.cols()) = c.Aij;
            o += static_cast<int>(c.Aij.cols());
        }
    }
    const Mat& A = sb.A;
    const Mat& E = sb.E;
    const Mat Tt = T.transpose();

    const AffineMat P = Lay.mat(i, "P"), Q = Lay.mat(i, "Q"), R = Lay.mat(i, "R"), W = Lay.mat(i, "W");
    const AffineMat L = structured(Lay, i, "L", n, m, n, true);
    const AffineMat H = structured(Lay, i, "H", n, m, n, true);
    const AffineMat M = structured(Lay, i, "M", n, m, nc, shared);
    const AffineMat N = structured(Lay, i, "N", n, m, nc, shared);
    const AffineMat X = Lay.mat(i, "X"), Z = Lay.mat(i, "Z");
    const AffineMat Xn = pad_rows(X, n), Xnc = pad_rows(X, nc);
    const AffineMat Zn = pad_rows(Z, n), Znc = pad_rows(Z, nc);

    // Neighbour-coupled diagonal blocks.
    std::vector<std::vector<AffineMat>> om1(d, std::vector<AffineMat>(d)), om2 = om1;
    std::vector<Eigen::Index> nsz;
    double sum_tau_j2 = 0.0;
    for (int r = 0; r < d; ++r) {
        const int j = sb.couplings[r].j;
        om1[r][r] = prm.h[j - 1] * Lay.mat(j, "P");
        om2[r][r] = (M_PI * M_PI / 4.0) * Lay.mat(j, "W");
        nsz.push_back(sys.sub(j).n());
        sum_tau_j2 += sys.tau(j) * sys.tau(j);
    }
    const AffineMat Om1 = AffineMat::blocks(om1, nsz, nsz);
    const AffineMat Om2 = AffineMat::blocks(om2, nsz, nsz);

    const Mat Y = build_Y(d, n);
    const AffineMat Pb = build_Psi_bar(alpha, tau, Y, build_Psi(rhat_of(R), Lay.mat(i, "G"), d));
    auto Pbl = [&](int u, int v) { return psi_bar_block(Pb, d, n, u, v); };

    const AffineMat LtT = L.transpose() * T;
    const AffineMat HtT = H.transpose() * T;
    const AffineMat MtT = M.transpose() * T;
    const AffineMat NtT = N.transpose() * T;

    std::vector<std::vector<AffineMat>> B(8, std::vector<AffineMat>(8));
    auto set = [&](int a, int b, AffineMat v) { B[a - 1][b - 1] = std::move(v); };

    set(1, 1, tau * tau * R - He(LtT) + sum_tau_j2 * W);
    set(1, 2, P + LtT * A + Xn - Tt * H);
    set(1, 6, LtT * Abar - Tt * M);
    set(1, 7, Zn - Tt * N);
    set(1, 8, LtT * E);

    set(2, 2, He(Xn + HtT * A) - Pbl(0, 0) + 2.0 * alpha * P + Q + Mat(sb.C.transpose() * sb.C));
    set(2, 3, -Pbl(0, 1));
    set(2, 4, -Pbl(0, 2));
    set(2, 5, -Pbl(0, 3));
    {
        AffineMat b26 = HtT * Abar + Mat(A.transpose() * Tt) * M;
        AffineMat b27 = Zn + Mat(A.transpose() * Tt) * N;
        if (shared) {
            b26 += Xnc.transpose();
            b27 += Xnc.transpose();
        }
        set(2, 6, b26);
        set(2, 7, b27);
    }
    set(2, 8, HtT * E + Mat(sb.C.transpose() * sb.F));

    set(3, 3, -Pbl(1, 1));
    set(3, 4, -Pbl(1, 2));
    set(3, 5, -Pbl(1, 3));
    set(4, 4, -Pbl(2, 2) - std::exp(-2.0 * alpha * tau) * Q);
    set(4, 5, -Pbl(2, 3));
    set(5, 5, -Pbl(3, 3));

    {
        AffineMat b67 = Om2 + Mat(Abar.transpose() * Tt) * N;
        AffineMat b77 = -Om2;
        if (shared) {
            b67 += Znc;
            b77 += He(Znc);
        }
        set(6, 6, -Om1 - Om2 + He(MtT * Abar));
        set(6, 7, b67);
        set(7, 7, b77);
    }
    set(6, 8, MtT * E);
    set(7, 8, NtT * E);

    AffineMat b88(Mat(sb.F.transpose() * sb.F));
    if (Lay.has(0, "s"))
        b88.add_term(Lay.find(0, "s").offset, -Mat::Identity(p, p));
    else
        b88 -= AffineMat(Mat((prm.gamma * prm.gamma) * Mat::Identity(p, p)));
    set(8, 8, b88);

    const auto sz = theta_block_sizes(i, sys);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < a; ++b)
            if (B[b][a].rows() != 0 || B[b][a].cols() != 0) B[a][b] = B[b][a].transpose();

    AffinePsdConstraint c;
    c.label = "Theta_" + std::to_string(i);
    c.subsystem = i;
    c.expr = AffineMat::blocks(B, sz, sz);
    c.sense = Sense::NegativeDefiniteMargin;
    c.margin = prm.eps;
    return c;
}

ControllerGains recover_gains(int i, const LargeScaleSystem& sys, const Mat& U, const Mat& X, const Mat& Z) {
    const auto& sb = sys.sub(i);
    ControllerGains g;
    g.i = i;
    Eigen::JacobiSVD<Mat> svd(U);
    const auto& sv = svd.singularValues();
    g.cond_U = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(g.cond_U <= 1e12))
        throw std::runtime_error("recover_gains: U_" + std::to_string(i) + " numerically singular (cond " +
                                 std::to_string(g.cond_U) + ")");
    auto lu = U.transpose().fullPivLu();
    g.Kii = lu.solve(X);
    const Mat Kc = lu.solve(Z);
    int o = 0;
    for (const auto& c : sb.couplings) {
        const int nj = sys.sub(c.j).n();
        g.Kij.push_back({c.j, Kc.middleCols(o, nj)});
        o += nj;
    }
    return g;
}

SynthesisProblem build_synthesis_problem(const LargeScaleSystem& sys, const SynthesisParams& params,
                                         const SynthesisOptions& opts) {
    require_valid(sys);
    if (auto v = validate_params(sys, params); !v.empty()) {
        std::string msg = "invalid synthesis parameters:";
        for (const auto& x : v) msg += "\n  [" + std::to_string(x.subsystem) + "] " + x.message;
        throw ConfigError(msg);
    }
    SynthesisProblem pr;
    pr.sys = sys;
    pr.params = params;
    pr.options = opts;
    pr.layout = build_layout(sys, params.minimize);
    for (int i = 1; i <= sys.N(); ++i) {
        if (!opts.T.empty()) {
            if (static_cast<int>(opts.T.size()) != sys.N()) throw ConfigError("need one T per subsystem");
            if (!satisfies_T_condition(opts.T[i - 1], sys.sub(i).B, 1e-8))
                throw ConfigError("T_" + std::to_string(i) + " does not satisfy T B = [I; 0]");
            pr.T.push_back(opts.T[i - 1]);
        } else {
            pr.T.push_back(build_T(sys.sub(i).B));
        }
    }
    ThetaContext ctx{&pr.sys, &pr.params, &pr.layout, opts.structure};
    for (int i = 1; i <= sys.N(); ++i) {
        const int n = sys.sub(i).n();
        pr.constraints.push_back(assemble_Theta(i, ctx, pr.T[i - 1]));
        pr.constraints.push_back(assemble_condition5(i, sys, pr.layout));
        const Mat epsI = params.eps * Mat::Identity(n, n);
        pr.constraints.push_back({"P_" + std::to_string(i) + "_pos", i, pr.layout.mat(i, "P") - epsI});
        pr.constraints.push_back({"W_" + std::to_string(i) + "_pos", i, pr.layout.mat(i, "W") - epsI});
        pr.constraints.push_back({"Q_" + std::to_string(i) + "_psd", i, pr.layout.mat(i, "Q")});
        pr.constraints.push_back({"R_" + std::to_string(i) + "_psd", i, pr.layout.mat(i, "R")});
    }
    pr.objective = Vec::Zero(pr.layout.size());
    if (params.minimize) {
        pr.s_index = pr.layout.find(0, "s").offset;
        pr.objective[pr.s_index] = 1.0;
    }
    return pr;
}

void write_constraint_dump(std::ostream& os, const SynthesisProblem& prob) {
    os << "# rrlmi constraint dump\n";
    os << "# variables " << prob.layout.size() << "\n";
    for (const auto& b : prob.layout.blocks())
        os << "var " << b.name << " " << b.subsystem << " " << b.rows << " " << b.cols << " "
           << (b.symmetric ? "sym" : "full") << " offset " << b.offset << " size " << b.size << "\n";
    os << std::setprecision(17);
    for (const auto& c : prob.constraints) {
        // Dumped in normalized form F0 + sum y_a F_a >= 0.
        os << "constraint " << c.label << " size " << c.size() << "\n";
        const Mat F0 = c.standard_constant();
        for (Eigen::Index r = 0; r < F0.rows(); ++r) {
            os << "const";
            for (Eigen::Index k = 0; k < F0.cols(); ++k) os << " " << F0(r, k);
            os << "\n";
        }
        for (const auto& t : c.standard_terms(0.0))
            for (const auto& e : t.entries)
                if (e.row() <= e.col()) os << "term " << t.var << " " << e.row() << " " << e.col() << " " << e.value() << "\n";
    }
}

} // namespace rrlmi
