#include "rrlmi/affine.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace rrlmi {

AffineMat AffineMat::variable_entry(Eigen::Index rows, Eigen::Index cols, int var, Mat unit) {
    AffineMat a(rows, cols);
    a.coef_.emplace(var, std::move(unit));
    return a;
}

AffineMat AffineMat::transpose() const {
    AffineMat t(c0_.transpose());
    for (const auto& [v, m] : coef_) t.coef_.emplace(v, m.transpose());
    return t;
}

void AffineMat::add_term(int var, const Mat& m) {
    auto it = coef_.find(var);
    if (it == coef_.end())
        coef_.emplace(var, m);
    else
        it->second += m;
}

AffineMat& AffineMat::operator+=(const AffineMat& o) {
    if (o.rows() != rows() || o.cols() != cols()) throw std::invalid_argument("AffineMat: shape mismatch in +");
    c0_ += o.c0_;
    for (const auto& [v, m] : o.coef_) add_term(v, m);
    return *this;
}

AffineMat& AffineMat::operator-=(const AffineMat& o) {
    if (o.rows() != rows() || o.cols() != cols()) throw std::invalid_argument("AffineMat: shape mismatch in -");
    c0_ -= o.c0_;
    for (const auto& [v, m] : o.coef_) add_term(v, -m);
    return *this;
}

AffineMat& AffineMat::operator*=(double s) {
    c0_ *= s;
    for (auto& [v, m] : coef_) m *= s;
    return *this;
}

Mat AffineMat::eval_linear(const Vec& y) const {
    Mat out = Mat::Zero(rows(), cols());
    for (const auto& [v, m] : coef_) out += y[v] * m;
    return out;
}

Mat AffineMat::eval(const Vec& y) const { return c0_ + eval_linear(y); }

AffineMat AffineMat::blocks(const std::vector<std::vector<AffineMat>>& grid,
                            const std::vector<Eigen::Index>& row_sizes,
                            const std::vector<Eigen::Index>& col_sizes) {
    Eigen::Index R = 0, C = 0;
    for (auto r : row_sizes) R += r;
    for (auto c : col_sizes) C += c;
    AffineMat out(R, C);
    Eigen::Index ro = 0;
    for (size_t a = 0; a < row_sizes.size(); ++a) {
        Eigen::Index co = 0;
        for (size_t b = 0; b < col_sizes.size(); ++b) {
            const AffineMat& blk = grid[a][b];
            if (blk.rows() != 0 || blk.cols() != 0) {
                if (blk.rows() != row_sizes[a] || blk.cols() != col_sizes[b])
                    throw std::invalid_argument("AffineMat::blocks: block (" + std::to_string(a) + "," +
                                                std::to_string(b) + ") has wrong shape");
                out.c0_.block(ro, co, row_sizes[a], col_sizes[b]) = blk.c0_;
                for (const auto& [v, m] : blk.coef_) {
                    auto it = out.coef_.find(v);
                    if (it == out.coef_.end()) it = out.coef_.emplace(v, Mat::Zero(R, C)).first;
                    it->second.block(ro, co, row_sizes[a], col_sizes[b]) += m;
                }
            }
            co += col_sizes[b];
        }
        ro += row_sizes[a];
    }
    return out;
}

AffineMat AffineMat::block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const {
    AffineMat out(c0_.block(r, c, nr, nc));
    for (const auto& [v, m] : coef_) {
        Mat b = m.block(r, c, nr, nc);
        if (b.cwiseAbs().maxCoeff() != 0.0) out.coef_.emplace(v, std::move(b));
    }
    return out;
}

AffineMat operator+(AffineMat a, const AffineMat& b) { return a += b; }
AffineMat operator-(AffineMat a, const AffineMat& b) { return a -= b; }
AffineMat operator-(const AffineMat& a) { return -1.0 * a; }
AffineMat operator*(double s, AffineMat a) { return a *= s; }

AffineMat operator*(const Mat& L, const AffineMat& a) {
    if (L.cols() != a.rows()) throw std::invalid_argument("AffineMat: shape mismatch in left product");
    AffineMat out(L * a.constant());
    for (const auto& [v, m] : a.terms()) out.add_term(v, L * m);
    return out;
}

AffineMat operator*(const AffineMat& a, const Mat& R) {
    if (a.cols() != R.rows()) throw std::invalid_argument("AffineMat: shape mismatch in right product");
    AffineMat out(a.constant() * R);
    for (const auto& [v, m] : a.terms()) out.add_term(v, m * R);
    return out;
}

AffineMat operator+(AffineMat a, const Mat& b) {
    a.constant() += b;
    return a;
}

AffineMat operator-(AffineMat a, const Mat& b) {
    a.constant() -= b;
    return a;
}

AffineMat He(const AffineMat& a) { return a + a.transpose(); }
AffineMat symmetric_part(const AffineMat& a) { return 0.5 * He(a); }

Mat AffinePsdConstraint::standard_constant() const {
    const Mat c = 0.5 * (expr.constant() + expr.constant().transpose());
    if (sense == Sense::PositiveSemidefinite) return c;
    return -c - margin * Mat::Identity(size(), size());
}

std::vector<SparseTerm> AffinePsdConstraint::standard_terms(double drop_tol) const {
    const double sgn = sense == Sense::PositiveSemidefinite ? 1.0 : -1.0;
    std::vector<SparseTerm> out;
    for (const auto& [v, m] : expr.terms()) {
        SparseTerm t{v, {}};
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                const double x = sgn * 0.5 * (m(r, c) + m(c, r));
                if (std::abs(x) > drop_tol) t.entries.emplace_back(static_cast<int>(r), static_cast<int>(c), x);
            }
        if (!t.entries.empty()) out.push_back(std::move(t));
    }
    return out;
}

double AffinePsdConstraint::min_eig(const Vec& y) const {
    Mat M = 0.5 * (expr.eval(y) + expr.eval(y).transpose());
    if (sense == Sense::NegativeDefiniteMargin) M = -M - margin * Mat::Identity(size(), size());
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

} // namespace rrlmi
