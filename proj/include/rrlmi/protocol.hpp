#pragma once

#include "rrlmi/model.hpp"

#include <ostream>
#include <vector>

namespace rrlmi {

// Pi moves the last element to the front; applied k times.
std::vector<int> shift_permutation(const std::vector<int>& ordered_set, long long k);

// 1-based position of j in Pi^k(N_i).
int neighbor_index(int j, long long k, int i, const LargeScaleSystem& sys);
int polled_neighbor(int i, long long k, const LargeScaleSystem& sys);
// (k - v + 1) * delta, clamped to the initial sample at t = 0.
double held_timestamp(int i, int j, long long k, const LargeScaleSystem& sys);
long long held_step(int i, int j, long long k, const LargeScaleSystem& sys);

struct HeldSample {
    int j = 0;
    Vec x;
    long long step = 0; // grid index of the snapshot
};

struct RoundRobinState {
    long long k = 0;
    // held[i-1][r] is the sample of the r-th neighbor in the ORIGINAL order of N_i.
    std::vector<std::vector<HeldSample>> held;
    // Samples transmitted so far (one per subsystem per step, plus the initial fill).
    long long transmissions = 0;

    // All held values take x_j(0) at k = 0.
    static RoundRobinState initial(const LargeScaleSystem& sys, const std::vector<Vec>& x0);
};

// Pure transition k -> k+1 using snapshots x_j(t_{k+1}).
RoundRobinState advance(const RoundRobinState& st, const LargeScaleSystem& sys,
                        const std::vector<Vec>& snapshots);

struct BandwidthCounters {
    long long round_robin_per_step; // N
    long long broadcast_per_step;   // sum of d_i
    double saving() const {
        return 1.0 - static_cast<double>(round_robin_per_step) / static_cast<double>(broadcast_per_step);
    }
};
BandwidthCounters bandwidth(const LargeScaleSystem& sys);

// CSV: step,i,polled_j,held_t_<j>...  (one row per subsystem per step)
void write_schedule_csv(std::ostream& os, const LargeScaleSystem& sys, long long steps);

} // namespace rrlmi
