#include "rrlmi/protocol.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

namespace rrlmi {

std::vector<int> shift_permutation(const std::vector<int>& ordered_set, long long k) {
    if (ordered_set.empty()) throw std::invalid_argument("shift_permutation: empty set");
    if (k < 0) throw std::invalid_argument("shift_permutation: negative power");
    std::vector<int> out = ordered_set;
    const auto d = static_cast<long long>(out.size());
    std::rotate(out.begin(), out.begin() + (d - k % d) % d, out.end());
    return out;
}

namespace {

int position_in(const SubsystemModel& s, int j) {
    for (int r = 0; r < s.d(); ++r)
        if (s.couplings[r].j == j) return r + 1;
    throw std::invalid_argument("subsystem " + std::to_string(j) + " is not a neighbor of " +
                                std::to_string(s.index));
}

} // namespace

int neighbor_index(int j, long long k, int i, const LargeScaleSystem& sys) {
    if (k < 0) throw std::invalid_argument("neighbor_index: negative step");
    const auto& s = sys.sub(i);
    const int r = position_in(s, j);
    const int d = s.d();
    return static_cast<int>((r - 1 + k) % d) + 1;
}

int polled_neighbor(int i, long long k, const LargeScaleSystem& sys) {
    if (k < 0) throw std::invalid_argument("polled_neighbor: negative step");
    const auto& s = sys.sub(i);
    const int d = s.d();
    // v = 1  <=>  (r - 1 + k) mod d == 0
    const int r = static_cast<int>(((-k) % d + d) % d) + 1;
    return s.couplings[r - 1].j;
}

long long held_step(int i, int j, long long k, const LargeScaleSystem& sys) {
    const long long v = neighbor_index(j, k, i, sys);
    return std::max(0LL, k - v + 1);
}

double held_timestamp(int i, int j, long long k, const LargeScaleSystem& sys) {
    return static_cast<double>(held_step(i, j, k, sys)) * sys.delta;
}

RoundRobinState RoundRobinState::initial(const LargeScaleSystem& sys, const std::vector<Vec>& x0) {
    if (static_cast<int>(x0.size()) != sys.N()) throw std::invalid_argument("initial: missing snapshot");
    RoundRobinState st;
    st.held.resize(sys.N());
    for (int i = 1; i <= sys.N(); ++i)
        for (const auto& c : sys.sub(i).couplings) {
            st.held[i - 1].push_back({c.j, x0[c.j - 1], 0});
            ++st.transmissions;
        }
    return st;
}

RoundRobinState advance(const RoundRobinState& st, const LargeScaleSystem& sys,
                        const std::vector<Vec>& snapshots) {
    if (static_cast<int>(snapshots.size()) != sys.N()) throw std::invalid_argument("advance: missing snapshot");
    RoundRobinState nx = st;
    nx.k = st.k + 1;
    for (int i = 1; i <= sys.N(); ++i) {
        const int j = polled_neighbor(i, nx.k, sys);
        auto& row = nx.held[i - 1];
        auto it = std::find_if(row.begin(), row.end(), [j](const HeldSample& h) { return h.j == j; });
        it->x = snapshots[j - 1];
        it->step = nx.k;
        ++nx.transmissions;
    }
    return nx;
}

BandwidthCounters bandwidth(const LargeScaleSystem& sys) {
    BandwidthCounters b{sys.N(), 0};
    for (const auto& s : sys.subsystems) b.broadcast_per_step += s.d();
    return b;
}

void write_schedule_csv(std::ostream& os, const LargeScaleSystem& sys, long long steps) {
    int dmax = 0;
    for (const auto& s : sys.subsystems) dmax = std::max(dmax, s.d());
    os << "step,i,polled_j";
    for (int r = 1; r <= dmax; ++r) os << ",neighbor_" << r << ",held_t_" << r;
    os << "\n" << std::setprecision(10);
    for (long long k = 0; k < steps; ++k)
        for (int i = 1; i <= sys.N(); ++i) {
            const auto& s = sys.sub(i);
            os << k << "," << i << "," << polled_neighbor(i, k, sys);
            for (int r = 0; r < dmax; ++r) {
                if (r < s.d())
                    os << "," << s.couplings[r].j << "," << held_timestamp(i, s.couplings[r].j, k, sys);
                else
                    os << ",,";
            }
            os << "\n";
        }
}

} // namespace rrlmi
