#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrlmi {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Coupling {
    int j;   // 1-based neighbor id
    Mat Aij; // n_i x n_j
};

struct SubsystemModel {
    int index = 0; // 1-based
    Mat A, B, E, C, F;
    // Order of this vector IS the ordered neighbor set N_i.
    std::vector<Coupling> couplings;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(E.cols()); }
    int q() const { return static_cast<int>(C.rows()); }
    int d() const { return static_cast<int>(couplings.size()); }
    std::vector<int> neighbors() const;
};

struct LargeScaleSystem {
    std::vector<SubsystemModel> subsystems;
    double delta = 0.0005;

    int N() const { return static_cast<int>(subsystems.size()); }
    const SubsystemModel& sub(int i) const { return subsystems.at(i - 1); }
    int total_states() const;
    // Sum of neighbor state dimensions for subsystem i (the "nc" of the LMI).
    int coupled_states(int i) const;
    // Offset of subsystem i's state inside the stacked vector.
    int state_offset(int i) const;
    double tau(int i) const { return sub(i).d() * delta; }
};

struct Violation {
    int subsystem; // 0 for system-level issues
    std::string message;
};

std::vector<Violation> validate_system(const LargeScaleSystem& sys);
void require_valid(const LargeScaleSystem& sys);

// Block-tridiagonal chain: N_1={2}, N_i={i-1,i+1}, N_N={N-1}.
// maker(i, neighbors) must return a subsystem whose couplings follow `neighbors`.
using SubsystemMaker = std::function<SubsystemModel(int i, const std::vector<int>& neighbors)>;
LargeScaleSystem build_chain_system(int N, const SubsystemMaker& maker, double delta = 0.0005);

LargeScaleSystem example2_system(double a, int N, double delta = 0.0005);
LargeScaleSystem example4_system(int N = 100, double delta = 0.0005);

// Stacked open-loop matrix (u = 0).
Mat assemble_open_loop_A(const LargeScaleSystem& sys);
int count_unstable_eigenvalues(const Mat& A, double tol = 0.0);

struct SynthesisParams {
    std::vector<double> alpha; // per subsystem
    std::vector<double> h;     // per subsystem
    double eps = 1e-6;
    bool minimize = true;
    double gamma = 0.0; // used when !minimize

    static SynthesisParams uniform(int N, double alpha, double h, double eps = 1e-6);
};

std::vector<Violation> validate_params(const LargeScaleSystem& sys, const SynthesisParams& prm);

} // namespace rrlmi
