#pragma once

#include "rrlmi/affine.hpp"
#include "rrlmi/model.hpp"

#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace rrlmi {

struct VarBlock {
    std::string name;
    int subsystem = 0; // 0 = global
    int rows = 0, cols = 0;
    bool symmetric = false;
    int offset = 0;
    int size = 0; // number of free scalars
};

class VariableLayout {
public:
    int add(const std::string& name, int subsystem, int rows, int cols, bool symmetric);
    int size() const { return total_; }
    const VarBlock& find(int subsystem, const std::string& name) const;
    bool has(int subsystem, const std::string& name) const;
    const std::vector<VarBlock>& blocks() const { return blocks_; }

    // The matrix variable as an affine expression (zero rows/cols allowed).
    AffineMat mat(int subsystem, const std::string& name) const;
    Mat value(int subsystem, const std::string& name, const Vec& y) const;
    // Inverse of value(): writes a matrix into the flat vector (symmetric part for sym blocks).
    void set(int subsystem, const std::string& name, const Mat& value, Vec& y) const;
    std::string describe(int index) const;

private:
    std::vector<VarBlock> blocks_;
    int total_ = 0;
};

// How the neighbour multipliers M_i, N_i are structured.
//  SharedU : M = N = [U 0; *21 *22] exactly as in the theorem statement (default).
//  ZeroTop : M = N = [0 0; *21 *22]; the bilinear K-terms through M, N then vanish
//            instead of being linearized via U. A sound restriction, offered as a
//            diagnostic alternative because SharedU is infeasible in practice.
enum class MultiplierStructure { SharedU, ZeroTop };
std::string to_string(MultiplierStructure s);
MultiplierStructure multiplier_structure_from_string(const std::string& s);

VariableLayout build_layout(const LargeScaleSystem& sys, bool gamma_variable);

// T B = [I; 0]; bottom rows an orthonormal basis of null(B^T).
Mat build_T(const Mat& B);
// Random invertible alternative satisfying That B = [I; 0].
Mat random_alternative_T(const Mat& B, std::mt19937_64& rng);
bool satisfies_T_condition(const Mat& T, const Mat& B, double tol = 1e-10);

Mat build_Y(int d, int n);
// Psi with R-hat on the diagonal and (G + G^T)/2 elsewhere; (d+1) x (d+1) blocks of size 2n.
AffineMat build_Psi(const AffineMat& Rhat, const AffineMat& G, int d);
Mat build_Psi(const Mat& Rhat, const Mat& G, int d);
AffineMat build_Psi_bar(double alpha, double tau, const Mat& Y, const AffineMat& Psi);
Mat build_Psi_bar(double alpha, double tau, const Mat& Y, const Mat& Psi);
// Row/column sizes of the partition [x(t); xi_a; x(t - tau); xi_b].
std::vector<Eigen::Index> psi_bar_partition(int d, int n);
// Block (u, v), 0-based.
AffineMat psi_bar_block(const AffineMat& Pb, int d, int n, int u, int v);
Mat psi_bar_block(const Mat& Pb, int d, int n, int u, int v);
AffineMat rhat_of(const AffineMat& R);

AffinePsdConstraint assemble_condition5(int i, const LargeScaleSystem& sys, const VariableLayout& layout);

struct ThetaContext {
    const LargeScaleSystem* sys = nullptr;
    const SynthesisParams* params = nullptr;
    const VariableLayout* layout = nullptr;
    MultiplierStructure structure = MultiplierStructure::SharedU;
};

std::vector<Eigen::Index> theta_block_sizes(int i, const LargeScaleSystem& sys);
AffinePsdConstraint assemble_Theta(int i, const ThetaContext& ctx, const Mat& T);

struct ControllerGains {
    int i = 0;
    Mat Kii;
    std::vector<Coupling> Kij; // neighbor-labelled, N_i order; reuses {j, matrix}
    double cond_U = 0.0;
};

ControllerGains recover_gains(int i, const LargeScaleSystem& sys, const Mat& U, const Mat& X, const Mat& Z);

struct SynthesisOptions {
    MultiplierStructure structure = MultiplierStructure::SharedU;
    std::vector<Mat> T; // empty -> build_T for each subsystem
    // minimize_gamma re-solves feasibility at gamma_min * (1 + gain_backoff) to extract gains.
    double gain_backoff = 0.01;
};

struct SynthesisProblem {
    LargeScaleSystem sys;
    SynthesisParams params;
    SynthesisOptions options;
    VariableLayout layout;
    std::vector<Mat> T;
    std::vector<AffinePsdConstraint> constraints;
    Vec objective;
    int s_index = -1; // -1 when gamma is fixed
};

SynthesisProblem build_synthesis_problem(const LargeScaleSystem& sys, const SynthesisParams& params,
                                         const SynthesisOptions& opts = {});

// Plain-text dump: per constraint the dense constant and sparse coefficient triplets.
void write_constraint_dump(std::ostream& os, const SynthesisProblem& prob);

} // namespace rrlmi
