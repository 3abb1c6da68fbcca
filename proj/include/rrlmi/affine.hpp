#pragma once

#include "rrlmi/model.hpp"

#include <Eigen/Sparse>

#include <map>
#include <string>
#include <vector>

namespace rrlmi {

// Matrix whose entries are affine in a flat decision vector y:
//   M(y) = c0 + sum_a y_a * coef[a]
class AffineMat {
public:
    AffineMat() = default;
    AffineMat(Eigen::Index rows, Eigen::Index cols) : c0_(Mat::Zero(rows, cols)) {}
    explicit AffineMat(Mat constant) : c0_(std::move(constant)) {}

    static AffineMat zero(Eigen::Index rows, Eigen::Index cols) { return AffineMat(rows, cols); }
    static AffineMat variable_entry(Eigen::Index rows, Eigen::Index cols, int var, Mat unit);

    Eigen::Index rows() const { return c0_.rows(); }
    Eigen::Index cols() const { return c0_.cols(); }
    const Mat& constant() const { return c0_; }
    Mat& constant() { return c0_; }
    const std::map<int, Mat>& terms() const { return coef_; }

    AffineMat transpose() const;
    AffineMat& operator+=(const AffineMat& o);
    AffineMat& operator-=(const AffineMat& o);
    AffineMat& operator*=(double s);
    void add_term(int var, const Mat& m);

    Mat eval(const Vec& y) const;
    // Only the variable-dependent part.
    Mat eval_linear(const Vec& y) const;

    // Assemble from a grid of blocks; missing (empty) blocks are zero.
    static AffineMat blocks(const std::vector<std::vector<AffineMat>>& grid,
                            const std::vector<Eigen::Index>& row_sizes,
                            const std::vector<Eigen::Index>& col_sizes);
    AffineMat block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const;

private:
    Mat c0_;
    std::map<int, Mat> coef_;
};

AffineMat operator+(AffineMat a, const AffineMat& b);
AffineMat operator-(AffineMat a, const AffineMat& b);
AffineMat operator-(const AffineMat& a);
AffineMat operator*(double s, AffineMat a);
AffineMat operator*(const Mat& L, const AffineMat& a);
AffineMat operator*(const AffineMat& a, const Mat& R);
AffineMat operator+(AffineMat a, const Mat& b);
AffineMat operator-(AffineMat a, const Mat& b);
// X + X^T
AffineMat He(const AffineMat& a);
AffineMat symmetric_part(const AffineMat& a);

struct SparseTerm {
    int var;
    // Upper + lower triangle entries of a symmetric matrix (both stored).
    std::vector<Eigen::Triplet<double>> entries;
};

enum class Sense {
    PositiveSemidefinite, // M(y) >= 0
    NegativeDefiniteMargin // M(y) <= -margin * I
};

struct AffinePsdConstraint {
    std::string label;
    int subsystem = 0;
    AffineMat expr;
    Sense sense = Sense::PositiveSemidefinite;
    double margin = 0.0;

    Eigen::Index size() const { return expr.rows(); }
    // Normalized form F0 + sum y_a F_a >= 0.
    Mat standard_constant() const;
    std::vector<SparseTerm> standard_terms(double drop_tol = 0.0) const;
    // Smallest eigenvalue of the normalized form at y (>= 0 means satisfied).
    double min_eig(const Vec& y) const;
};

} // namespace rrlmi
