#include "rrlmi/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace rrlmi {

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::NumericalError: return "NumericalError";
    }
    return "?";
}

ConicProgram ConicProgram::from(const SynthesisProblem& p) {
    ConicProgram cp;
    cp.num_vars = p.layout.size();
    cp.objective = p.objective;
    cp.constraints = p.constraints;
    return cp;
}

namespace {

using Trip = Eigen::Triplet<double>;
using SpMat = Eigen::SparseMatrix<double>;

struct Block {
    int n = 0;
    Mat F0;
    std::vector<int> vars;
    std::vector<std::vector<Trip>> ents; // full symmetric storage
    double scale = 1.0;
    std::vector<int> hpos; // value slots in H for local pairs a <= b
};

struct Lowered {
    int nv = 0;
    Vec c;
    std::vector<Block> blocks;
    int degree = 0;
};

Lowered lower(const ConicProgram& p) {
    Lowered L;
    L.nv = p.num_vars;
    L.c = p.objective.size() ? p.objective : Vec::Zero(p.num_vars);
    for (const auto& con : p.constraints) {
        Block b;
        b.n = static_cast<int>(con.size());
        b.F0 = con.standard_constant();
        double mx = b.F0.cwiseAbs().maxCoeff();
        for (auto& t : con.standard_terms(0.0)) {
            if (t.var < 0 || t.var >= L.nv) throw std::out_of_range("constraint references variable out of range");
            for (const auto& e : t.entries) mx = std::max(mx, std::abs(e.value()));
            b.vars.push_back(t.var);
            b.ents.push_back(std::move(t.entries));
        }
        b.scale = mx > 0 ? 1.0 / mx : 1.0;
        b.F0 *= b.scale;
        for (auto& es : b.ents)
            for (auto& e : es) e = Trip(e.row(), e.col(), e.value() * b.scale);
        L.degree += b.n;
        L.blocks.push_back(std::move(b));
    }
    L.degree += 1; // tau * kappa
    return L;
}

double inner(const std::vector<Trip>& F, const Mat& X) {
    double s = 0.0;
    for (const auto& e : F) s += e.value() * X(e.row(), e.col());
    return s;
}

void add_scaled(Mat& X, const std::vector<Trip>& F, double a) {
    for (const auto& e : F) X(e.row(), e.col()) += a * e.value();
}

Mat sym(const Mat& X) { return 0.5 * (X + X.transpose()); }

double min_eig(const Mat& X) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(X), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

struct Scaling {
    Mat R, Rinv, Wi;
    Vec lambda;
};

bool nt_scaling(const Mat& S, const Mat& Z, Scaling& out) {
    Eigen::LLT<Mat> cs(S), cz(Z);
    if (cs.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
    const Mat Ls = cs.matrixL(), Lz = cz.matrixL();
    Eigen::JacobiSVD<Mat> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.lambda = svd.singularValues();
    if (out.lambda.minCoeff() <= 0) return false;
    const Vec isq = out.lambda.cwiseSqrt().cwiseInverse();
    out.R = Ls * svd.matrixV() * isq.asDiagonal();
    out.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    out.Wi = out.Rinv.transpose() * out.Rinv;
    return true;
}

// Largest alpha <= 1 with lambda + alpha * D >= 0 (lambda diagonal, positive).
double max_step(const Vec& lambda, const Mat& D) {
    const Vec isq = lambda.cwiseSqrt().cwiseInverse();
    const Mat K = isq.asDiagonal() * sym(D) * isq.asDiagonal();
    const double e = min_eig(K);
    return e < 0 ? -1.0 / e : INFINITY;
}

// Solve Lambda o T = M, o the Jordan product (XY + YX)/2.
Mat lyap_diag(const Vec& lambda, const Mat& M) {
    Mat T(M.rows(), M.cols());
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) T(r, c) = 2.0 * M(r, c) / (lambda(r) + lambda(c));
    return T;
}

class Ipm {
public:
    Ipm(const ConicProgram& p) : prog_(p), L_(lower(p)), opt_(p.options) {}
    SolveOutcome run();

private:
    void build_pattern();
    bool assemble_and_factor();
    void solve_H(const Vec& rhs, Vec& x);

    struct Dir {
        Vec dy;
        std::vector<Mat> dS, dZ;
        double dtau = 0, dkappa = 0;
    };
    // eta scales the residual targets, T the scaled complementarity targets.
    void direction(double eta, const std::vector<Mat>& T, double rc_tau, Dir& d);

    const ConicProgram& prog_;
    Lowered L_;
    SolverOptions opt_;

    Vec y_;
    std::vector<Mat> S_, Z_;
    double tau_ = 1, kappa_ = 1;

    std::vector<Mat> rP_;
    Vec rD_;
    double rG_ = 0;

    std::vector<Scaling> sc_;
    std::vector<std::vector<Mat>> Gw_; // Wi F_a Wi per block and local var
    SpMat H_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;
    Vec f_, hv_;
    double q00_ = 0;
};

void Ipm::build_pattern() {
    std::vector<Trip> pat;
    for (int k = 0; k < L_.nv; ++k) pat.emplace_back(k, k, 0.0);
    for (const auto& b : L_.blocks)
        for (size_t a = 0; a < b.vars.size(); ++a)
            for (size_t c = a; c < b.vars.size(); ++c) {
                const int i = std::max(b.vars[a], b.vars[c]), j = std::min(b.vars[a], b.vars[c]);
                pat.emplace_back(i, j, 0.0);
            }
    H_.resize(L_.nv, L_.nv);
    H_.setFromTriplets(pat.begin(), pat.end());
    H_.makeCompressed();
    for (auto& b : L_.blocks) {
        b.hpos.clear();
        for (size_t a = 0; a < b.vars.size(); ++a)
            for (size_t c = a; c < b.vars.size(); ++c) {
                const int i = std::max(b.vars[a], b.vars[c]), j = std::min(b.vars[a], b.vars[c]);
                b.hpos.push_back(static_cast<int>(&H_.coeffRef(i, j) - H_.valuePtr()));
            }
    }
}

bool Ipm::assemble_and_factor() {
    const int nb = static_cast<int>(L_.blocks.size());
    sc_.resize(nb);
    Gw_.resize(nb);
    std::fill(H_.valuePtr(), H_.valuePtr() + H_.nonZeros(), 0.0);
    f_ = Vec::Zero(L_.nv);
    q00_ = 0;
    for (int k = 0; k < nb; ++k) {
        const Block& b = L_.blocks[k];
        if (!nt_scaling(S_[k], Z_[k], sc_[k])) return false;
        const Mat& Wi = sc_[k].Wi;
        auto& G = Gw_[k];
        G.assign(b.vars.size(), Mat());
        for (size_t a = 0; a < b.vars.size(); ++a) {
            Mat g = Mat::Zero(b.n, b.n);
            for (const auto& e : b.ents[a]) g.noalias() += e.value() * Wi.col(e.row()) * Wi.row(e.col());
            G[a] = std::move(g);
            f_[b.vars[a]] += (b.F0.array() * G[a].array()).sum();
        }
        const Mat WF0 = Wi * b.F0;
        q00_ += (WF0.array() * WF0.transpose().array()).sum();
        int slot = 0;
        double* hv = H_.valuePtr();
        for (size_t a = 0; a < b.vars.size(); ++a)
            for (size_t c = a; c < b.vars.size(); ++c) {
                double v = 0.0;
                for (const auto& e : b.ents[c]) v += e.value() * G[a](e.col(), e.row());
                hv[b.hpos[slot++]] += v;
            }
    }
    if (!analyzed_) {
        ldlt_.analyzePattern(H_);
        analyzed_ = true;
    }
    ldlt_.factorize(H_);
    if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= 0).any()) {
        // Tiny diagonal regularization for nearly dependent columns.
        double dmax = 0;
        for (int k = 0; k < L_.nv; ++k) dmax = std::max(dmax, H_.coeff(k, k));
        SpMat Hr = H_;
        for (int k = 0; k < L_.nv; ++k) Hr.coeffRef(k, k) += 1e-13 * std::max(dmax, 1.0);
        ldlt_.factorize(Hr);
        if (ldlt_.info() != Eigen::Success) return false;
    }
    return true;
}

void Ipm::solve_H(const Vec& rhs, Vec& x) {
    x = ldlt_.solve(rhs);
    // Two refinement sweeps against the unregularized matrix.
    for (int it = 0; it < 2; ++it) {
        Vec r = rhs - H_.selfadjointView<Eigen::Lower>() * x;
        x += ldlt_.solve(r);
    }
}

void Ipm::direction(double eta, const std::vector<Mat>& T, double rc_tau, Dir& d) {
    const int nb = static_cast<int>(L_.blocks.size());
    std::vector<Mat> Bk(nb), WBW(nb);
    Vec g = eta * rD_;
    double trF0WBW = 0;
    for (int k = 0; k < nb; ++k) {
        const Block& b = L_.blocks[k];
        const auto& s = sc_[k];
        Bk[k] = sym(s.R * T[k] * s.R.transpose()) + eta * rP_[k];
        WBW[k] = s.Wi * Bk[k] * s.Wi;
        for (size_t a = 0; a < b.vars.size(); ++a) g[b.vars[a]] += inner(b.ents[a], WBW[k]);
        trF0WBW += (b.F0.array() * WBW[k].array()).sum();
    }
    const Vec& c = L_.c;
    Vec u;
    solve_H(g, u);
    const double rhs_g = -eta * rG_ - rc_tau / tau_ - trF0WBW;
    const Vec cmf = c - f_;
    const double den = cmf.dot(hv_) + kappa_ / tau_ + q00_;
    d.dtau = (cmf.dot(u) - rhs_g) / den;
    d.dy = u - d.dtau * hv_;
    d.dkappa = (rc_tau - kappa_ * d.dtau) / tau_;
    d.dS.resize(nb);
    d.dZ.resize(nb);
    for (int k = 0; k < nb; ++k) {
        const Block& b = L_.blocks[k];
        Mat AY = d.dtau * b.F0;
        for (size_t a = 0; a < b.vars.size(); ++a) add_scaled(AY, b.ents[a], d.dy[b.vars[a]]);
        d.dS[k] = -eta * rP_[k] + AY;
        d.dZ[k] = sym(sc_[k].Wi * (Bk[k] - AY) * sc_[k].Wi);
    }
}

SolveOutcome Ipm::run() {
    SolveOutcome out;
    const int nb = static_cast<int>(L_.blocks.size());
    if (nb == 0) {
        out.message = "program has no constraints";
        return out;
    }
    build_pattern();
    y_ = Vec::Zero(L_.nv);
    S_.resize(nb);
    Z_.resize(nb);
    for (int k = 0; k < nb; ++k) {
        S_[k] = Mat::Identity(L_.blocks[k].n, L_.blocks[k].n);
        Z_[k] = S_[k];
    }
    tau_ = kappa_ = 1.0;
    double normF0 = 0;
    for (const auto& b : L_.blocks) normF0 += b.F0.squaredNorm();
    normF0 = std::sqrt(normF0);
    const double normc = L_.c.norm();
    const double nu = L_.degree;

    rP_.resize(nb);
    // Best iterates seen so far; used when the method stalls short of the tight tolerances.
    double best_err = INFINITY, best_ratio = INFINITY;
    Vec best_y;
    std::vector<Mat> best_Z;
    double best_trF0Z = 0;
    std::vector<Mat> best_dual;
    double best_dual_tau = 1;
    bool use_best = false;
    for (int it = 0; it <= opt_.max_iterations; ++it) {
        // Residuals of the homogeneous embedding.
        rD_ = -tau_ * L_.c;
        double trF0Z = 0, trSZ = 0, prn = 0;
        for (int k = 0; k < nb; ++k) {
            const Block& b = L_.blocks[k];
            Mat Fy = tau_ * b.F0;
            for (size_t a = 0; a < b.vars.size(); ++a) {
                add_scaled(Fy, b.ents[a], y_[b.vars[a]]);
                rD_[b.vars[a]] += inner(b.ents[a], Z_[k]);
            }
            rP_[k] = S_[k] - Fy;
            prn += rP_[k].squaredNorm();
            trF0Z += (b.F0.array() * Z_[k].array()).sum();
            trSZ += (S_[k].array() * Z_[k].array()).sum();
        }
        const double cy = L_.c.dot(y_);
        rG_ = kappa_ + cy + trF0Z;
        const double mu = (trSZ + tau_ * kappa_) / nu;

        out.iterations = it;
        out.primal_residual = std::sqrt(prn) / tau_ / (1.0 + normF0);
        out.dual_residual = rD_.norm() / tau_ / (1.0 + normc);
        const double pobj = cy / tau_, dobj = -trF0Z / tau_;
        out.rel_gap = std::max(std::abs(pobj - dobj), trSZ / (tau_ * tau_)) / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (opt_.verbose)
            std::fprintf(stderr, "%3d pobj %+.8e dobj %+.8e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e mu %.2e\n",
                         it, pobj, dobj, out.primal_residual, out.dual_residual, out.rel_gap, tau_, kappa_, mu);

        if (out.primal_residual <= opt_.feas_tol && out.dual_residual <= opt_.feas_tol && out.rel_gap <= opt_.gap_tol) {
            out.status = SolveStatus::Optimal;
            break;
        }
        const double err = std::max({out.primal_residual, out.dual_residual, out.rel_gap});
        if (err < best_err) {
            best_err = err;
            best_y = y_ / tau_;
            best_dual = Z_;
            best_dual_tau = tau_;
        }
        // Farkas ray: Z >= 0, A*(Z) ~ 0, <F0, Z> < 0.
        if (trF0Z < 0) {
            const Vec adj = rD_ + tau_ * L_.c;
            const double ratio = adj.norm() / (-trF0Z);
            if (ratio < best_ratio) {
                best_ratio = ratio;
                best_Z = Z_;
                best_trF0Z = trF0Z;
            }
            if (ratio <= opt_.infeas_tol) {
                out.status = SolveStatus::Infeasible;
                out.certificate.resize(nb);
                for (int k = 0; k < nb; ++k) out.certificate[k] = (L_.blocks[k].scale / -trF0Z) * Z_[k];
                out.message = "primal infeasible (Farkas certificate)";
                return out;
            }
        }
        if (cy < 0) {
            double rn = 0;
            for (int k = 0; k < nb; ++k) rn += (rP_[k] + tau_ * L_.blocks[k].F0).squaredNorm();
            if (std::sqrt(rn) / (-cy) <= opt_.infeas_tol) {
                out.status = SolveStatus::NumericalError;
                out.message = "dual infeasible: objective unbounded below";
                return out;
            }
        }
        if (it == opt_.max_iterations) {
            out.status = SolveStatus::MaxIter;
            out.message = "iteration limit reached";
            break;
        }

        if (!assemble_and_factor()) {
            out.status = SolveStatus::NumericalError;
            out.message = "loss of positive definiteness in scaling/Schur complement at iteration " + std::to_string(it);
            break;
        }
        solve_H(L_.c + f_, hv_);

        // Predictor.
        std::vector<Mat> T(nb);
        for (int k = 0; k < nb; ++k) T[k] = -Mat(sc_[k].lambda.asDiagonal());
        Dir aff;
        direction(1.0, T, -tau_ * kappa_, aff);
        auto step_len = [&](const Dir& d) {
            double a = INFINITY;
            for (int k = 0; k < nb; ++k) {
                const auto& s = sc_[k];
                a = std::min(a, max_step(s.lambda, s.Rinv * d.dS[k] * s.Rinv.transpose()));
                a = std::min(a, max_step(s.lambda, s.R.transpose() * d.dZ[k] * s.R));
            }
            if (d.dtau < 0) a = std::min(a, -tau_ / d.dtau);
            if (d.dkappa < 0) a = std::min(a, -kappa_ / d.dkappa);
            return a;
        };
        const double a_aff = std::min(1.0, step_len(aff));
        double mu_aff = (tau_ + a_aff * aff.dtau) * (kappa_ + a_aff * aff.dkappa);
        for (int k = 0; k < nb; ++k)
            mu_aff += ((S_[k] + a_aff * aff.dS[k]).array() * (Z_[k] + a_aff * aff.dZ[k]).array()).sum();
        mu_aff /= nu;
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

        // Corrector with second-order term.
        for (int k = 0; k < nb; ++k) {
            const auto& s = sc_[k];
            const Mat dSs = s.Rinv * aff.dS[k] * s.Rinv.transpose();
            const Mat dZs = s.R.transpose() * aff.dZ[k] * s.R;
            Mat Mt = sigma * mu * Mat::Identity(L_.blocks[k].n, L_.blocks[k].n);
            Mt.diagonal() -= s.lambda.cwiseAbs2();
            Mt -= 0.5 * (dSs * dZs + dZs * dSs);
            T[k] = lyap_diag(s.lambda, Mt);
        }
        Dir d;
        direction(1.0 - sigma, T, sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa, d);
        const double alpha = std::min(1.0, 0.98 * step_len(d));
        if (!(alpha > 1e-12)) {
            out.status = SolveStatus::NumericalError;
            out.message = "step length collapsed at iteration " + std::to_string(it);
            break;
        }
        y_ += alpha * d.dy;
        for (int k = 0; k < nb; ++k) {
            S_[k] = sym(S_[k] + alpha * d.dS[k]);
            Z_[k] = sym(Z_[k] + alpha * d.dZ[k]);
        }
        tau_ += alpha * d.dtau;
        kappa_ += alpha * d.dkappa;
    }
    if (out.status != SolveStatus::Optimal) {
        char buf[160];
        if (best_err <= opt_.relaxed_tol) {
            std::snprintf(buf, sizeof buf, "; accepted best iterate at reduced accuracy (max rel. residual %.2e)", best_err);
            out.message += buf;
            out.status = SolveStatus::Optimal;
            use_best = true;
        } else if (best_ratio <= opt_.relaxed_infeas_tol) {
            std::snprintf(buf, sizeof buf, "; primal infeasible at reduced accuracy (Farkas ratio %.2e)", best_ratio);
            out.message += buf;
            out.status = SolveStatus::Infeasible;
            out.certificate.resize(nb);
            for (int k = 0; k < nb; ++k) out.certificate[k] = (L_.blocks[k].scale / -best_trF0Z) * best_Z[k];
            return out;
        }
    }
    if (out.status == SolveStatus::Optimal || out.status == SolveStatus::MaxIter) {
        out.y = use_best ? best_y : Vec(y_ / tau_);
        const auto& Zf = use_best ? best_dual : Z_;
        const double tf = use_best ? best_dual_tau : tau_;
        out.dual.resize(nb);
        for (int k = 0; k < nb; ++k) out.dual[k] = (L_.blocks[k].scale / tf) * Zf[k];
        out.objective = prog_.objective.size() ? prog_.objective.dot(out.y) : 0.0;
        double worst = 0;
        for (const auto& c : prog_.constraints) worst = std::max(worst, -c.min_eig(out.y));
        out.max_violation = worst;
    }
    return out;
}

} // namespace

SolveOutcome solve(const ConicProgram& program) {
    if (program.constraints.empty()) {
        SolveOutcome o;
        o.message = "program has no constraints";
        return o;
    }
    if (program.objective.size() != 0 && program.objective.size() != program.num_vars)
        throw std::invalid_argument("solve: objective size mismatch");
    Ipm ipm(program);
    SolveOutcome out = ipm.run();
    if (out.status == SolveStatus::Optimal || out.status == SolveStatus::Infeasible) return out;

    // Phase one: max t s.t. F(y) >= t I, t <= 1. Always strictly feasible, so its dual
    // gives a well-scaled Farkas certificate whenever t* < 0.
    ConicProgram p1;
    p1.num_vars = program.num_vars + 1;
    p1.objective = Vec::Zero(p1.num_vars);
    p1.objective[program.num_vars] = -1.0;
    p1.options = program.options;
    const int tv = program.num_vars;
    for (const auto& c : program.constraints) {
        AffinePsdConstraint c1 = c;
        const Mat I = Mat::Identity(c.size(), c.size());
        c1.expr.add_term(tv, c.sense == Sense::PositiveSemidefinite ? Mat(-I) : I);
        p1.constraints.push_back(std::move(c1));
    }
    AffinePsdConstraint cap;
    cap.label = "phase1_cap";
    cap.expr = AffineMat(Mat::Ones(1, 1));
    cap.expr.add_term(tv, -Mat::Ones(1, 1));
    p1.constraints.push_back(cap);

    Ipm ipm1(p1);
    const SolveOutcome o1 = ipm1.run();
    if (o1.status != SolveStatus::Optimal) {
        out.message += "; phase one inconclusive (" + o1.message + ")";
        return out;
    }
    const double tstar = o1.y[tv];
    char buf[200];
    if (tstar >= 0) {
        std::snprintf(buf, sizeof buf, "; phase one max margin t* = %.3e (no certificate of infeasibility)", tstar);
        out.message += buf;
        return out;
    }
    double f0 = 0;
    const size_t nb = program.constraints.size();
    for (size_t k = 0; k < nb; ++k)
        f0 += (program.constraints[k].standard_constant().array() * o1.dual[k].array()).sum();
    if (!(f0 < 0)) {
        out.message += "; phase one dual has <F0, Z> >= 0";
        return out;
    }
    out.status = SolveStatus::Infeasible;
    out.certificate.resize(nb);
    for (size_t k = 0; k < nb; ++k) out.certificate[k] = o1.dual[k] / -f0;
    out.y.resize(0);
    out.objective = NAN;
    std::snprintf(buf, sizeof buf, "; primal infeasible via phase one (max margin t* = %.3e)", tstar);
    out.message += buf;
    out.phase_one_margin = tstar;
    return out;
}

bool FarkasCheck::proves_infeasible(double tol) const {
    return f0_inner < 0 && min_eig >= -tol * std::abs(f0_inner) && worst_coefficient_norm_ratio <= tol;
}

FarkasCheck check_farkas(const ConicProgram& program, const std::vector<Mat>& Z) {
    FarkasCheck fc;
    if (Z.size() != program.constraints.size()) throw std::invalid_argument("check_farkas: wrong block count");
    Vec adj = Vec::Zero(program.num_vars), fnorm = Vec::Zero(program.num_vars);
    double f0 = 0, me = INFINITY, znorm = 0;
    for (size_t k = 0; k < Z.size(); ++k) {
        const auto& c = program.constraints[k];
        f0 += (c.standard_constant().array() * Z[k].array()).sum();
        me = std::min(me, min_eig(Z[k]));
        znorm += Z[k].squaredNorm();
        for (const auto& t : c.standard_terms(0.0)) {
            double v = 0, nn = 0;
            for (const auto& e : t.entries) {
                v += e.value() * Z[k](e.row(), e.col());
                nn += e.value() * e.value();
            }
            adj[t.var] += v;
            fnorm[t.var] += nn;
        }
    }
    fc.f0_inner = f0;
    fc.min_eig = me;
    fc.max_abs_adjoint = adj.cwiseAbs().maxCoeff();
    double worst = 0;
    znorm = std::sqrt(znorm);
    for (int a = 0; a < program.num_vars; ++a)
        if (fnorm[a] > 0) worst = std::max(worst, std::abs(adj[a]) / (std::sqrt(fnorm[a]) * znorm));
    fc.worst_coefficient_norm_ratio = worst;
    return fc;
}

void write_sdpa(std::ostream& os, const ConicProgram& program) {
    os << std::setprecision(17);
    os << "\"rrlmi export: min c'y s.t. sum_a y_a F_a - (-F0) >= 0\"\n";
    os << program.num_vars << " = mDIM\n" << program.constraints.size() << " = nBLOCK\n";
    for (const auto& c : program.constraints) os << c.size() << " ";
    os << "= bLOCKsTRUCT\n";
    for (int a = 0; a < program.num_vars; ++a)
        os << (program.objective.size() ? program.objective[a] : 0.0) << (a + 1 < program.num_vars ? " " : "\n");
    for (size_t k = 0; k < program.constraints.size(); ++k) {
        const auto& c = program.constraints[k];
        const Mat F0 = c.standard_constant();
        for (Eigen::Index r = 0; r < F0.rows(); ++r)
            for (Eigen::Index q = r; q < F0.cols(); ++q)
                if (F0(r, q) != 0.0) os << 0 << " " << k + 1 << " " << r + 1 << " " << q + 1 << " " << -F0(r, q) << "\n";
        for (const auto& t : c.standard_terms(0.0))
            for (const auto& e : t.entries)
                if (e.row() <= e.col())
                    os << t.var + 1 << " " << k + 1 << " " << e.row() + 1 << " " << e.col() + 1 << " " << e.value() << "\n";
    }
}

// ---------------------------------------------------------------------------

SynthesisResult solve_synthesis(const SynthesisProblem& prob, const SolverOptions& opts) {
    SynthesisResult res;
    ConicProgram cp = ConicProgram::from(prob);
    cp.options = opts;
    const auto t0 = std::chrono::steady_clock::now();
    res.outcome = solve(cp);
    res.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.status = res.outcome.status;
    if (res.outcome.has_values()) {
        res.certificate = res.outcome.y;
        double worst = INFINITY;
        for (const auto& c : prob.constraints) {
            const double e = c.min_eig(res.certificate);
            if (e < worst) {
                worst = e;
                res.worst_constraint = c.label;
            }
        }
        res.min_certificate_eig = worst;
        res.gamma = prob.s_index >= 0 ? std::sqrt(std::max(0.0, res.certificate[prob.s_index])) : prob.params.gamma;
        res.gamma_certified = res.gamma;
        res.feasible = res.status == SolveStatus::Optimal && worst >= -1e-6;
        try {
            for (int i = 1; i <= prob.sys.N(); ++i)
                res.gains.push_back(recover_gains(i, prob.sys, prob.layout.value(i, "U", res.certificate),
                                                  prob.layout.value(i, "X", res.certificate),
                                                  prob.layout.value(i, "Z", res.certificate)));
        } catch (const std::exception& e) {
            res.feasible = false;
            res.gains.clear();
            res.diagnostic = std::string("infeasible in practice: ") + e.what();
        }
        if (res.status == SolveStatus::MaxIter)
            res.diagnostic = "solver stopped at the iteration limit; values are not certified";
    } else if (res.status == SolveStatus::Infeasible) {
        // Rank constraints by their share of the Farkas certificate.
        std::vector<std::pair<double, std::string>> share;
        for (size_t k = 0; k < cp.constraints.size(); ++k) {
            const double w = (cp.constraints[k].standard_constant().array() * res.outcome.certificate[k].array()).sum();
            share.emplace_back(w, cp.constraints[k].label);
        }
        std::sort(share.begin(), share.end());
        std::ostringstream os;
        os << "LMI infeasible (Farkas certificate found). Most negative <F0_k, Z_k> contributions:";
        for (size_t k = 0; k < std::min<size_t>(4, share.size()); ++k)
            os << " " << share[k].second << "=" << std::setprecision(3) << share[k].first;
        os << ". Hints: reduce eps (currently " << prob.params.eps << ") or alpha_i, check the h_i < 2 alpha_i / d_i margin";
        if (prob.options.structure == MultiplierStructure::SharedU) os << ", or try the zero-top multiplier structure";
        os << ".";
        res.diagnostic = os.str();
    } else {
        res.diagnostic = res.outcome.message;
    }
    return res;
}

SynthesisResult minimize_gamma(const LargeScaleSystem& sys, const SynthesisParams& params,
                               const SynthesisOptions& sopts, const SolverOptions& opts) {
    SynthesisParams p = params;
    p.minimize = true;
    SynthesisResult r = solve_synthesis(build_synthesis_problem(sys, p, sopts), opts);
    r.gamma_certified = r.gamma;
    if (!r.feasible || !(sopts.gain_backoff > 0)) return r;
    // The minimizer sits on the boundary of the feasible set (often an unattained infimum), where
    // U_i -> 0 and K = U^{-1} X blows up. Gains are taken from an interior point at a slightly
    // larger gamma instead.
    SynthesisResult b = feasibility_at_gamma(sys, params, r.gamma * (1.0 + sopts.gain_backoff), sopts, opts);
    if (b.feasible) {
        r.gains = std::move(b.gains);
        r.certificate = std::move(b.certificate);
        r.min_certificate_eig = b.min_certificate_eig;
        r.worst_constraint = b.worst_constraint;
        r.gamma_certified = b.gamma;
        r.solve_seconds += b.solve_seconds;
    } else {
        r.diagnostic += (r.diagnostic.empty() ? "" : " ") + std::string("gain back-off solve failed; gains are from the optimum.");
    }
    return r;
}

SynthesisResult feasibility_at_gamma(const LargeScaleSystem& sys, SynthesisParams params, double gamma,
                                     const SynthesisOptions& sopts, const SolverOptions& opts) {
    params.minimize = false;
    params.gamma = gamma;
    return solve_synthesis(build_synthesis_problem(sys, params, sopts), opts);
}

SynthesisResult bisect_gamma(const LargeScaleSystem& sys, const SynthesisParams& params, double lo, double hi,
                             double rel_width, const SynthesisOptions& sopts, const SolverOptions& opts) {
    SynthesisResult best = feasibility_at_gamma(sys, params, hi, sopts, opts);
    if (!best.feasible) {
        best.diagnostic = "bisection upper bound gamma=" + std::to_string(hi) + " is infeasible. " + best.diagnostic;
        return best;
    }
    while (hi - lo > rel_width * hi) {
        const double mid = 0.5 * (lo + hi);
        SynthesisResult r = feasibility_at_gamma(sys, params, mid, sopts, opts);
        if (r.feasible) {
            r.gamma_certified = mid;
            hi = mid;
            best = std::move(r);
        } else {
            lo = mid;
        }
    }
    best.gamma = hi;
    if (std::isnan(best.gamma_certified)) best.gamma_certified = hi;
    return best;
}

} // namespace rrlmi
