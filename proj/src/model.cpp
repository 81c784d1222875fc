#include "cvarssp/model.hpp"

#include <cmath>
#include <cstdio>
#include <deque>

namespace cvarssp {

namespace {

std::string fmt(const char* pattern, int a, int b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

}  // namespace

ValidationReport validate_model(const SspModel& model) {
    ValidationReport report;
    auto fail = [&report](std::string msg) {
        report.ok = false;
        report.violations.push_back(std::move(msg));
    };

    const int n = model.num_states;
    if (n < 2) {
        fail("num_states must be at least 2 (terminal plus one transient state)");
        return report;
    }
    if (static_cast<int>(model.actions.size()) != n ||
        static_cast<int>(model.transition.size()) != n ||
        static_cast<int>(model.cost_g.size()) != n ||
        static_cast<int>(model.cost_c.size()) != n) {
        fail("actions/transition/cost arrays must all have num_states entries");
        return report;
    }

    for (int s = 0; s < n; ++s) {
        const int na = model.actions[s];
        if (na < 1) {
            fail(fmt("state %d has no actions", s));
            continue;
        }
        if (static_cast<int>(model.transition[s].size()) != na ||
            static_cast<int>(model.cost_g[s].size()) != na ||
            static_cast<int>(model.cost_c[s].size()) != na) {
            fail(fmt("state %d: per-action arrays disagree with actions[%d]", s, s));
            continue;
        }
        for (int a = 0; a < na; ++a) {
            const auto& row = model.transition[s][a];
            if (static_cast<int>(row.size()) != n) {
                fail(fmt("transition row (%d,%d) has wrong length", s, a));
                continue;
            }
            double sum = 0.0;
            for (int t = 0; t < n; ++t) {
                const double p = row[t];
                if (!(p >= 0.0) || p > 1.0 + 1e-12) {
                    fail(fmt("transition row (%d,%d) has an entry outside [0,1]", s, a));
                    break;
                }
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                fail(fmt("transition row (%d,%d) does not sum to 1", s, a));
            if (!std::isfinite(model.cost_g[s][a]) || !std::isfinite(model.cost_c[s][a]))
                fail(fmt("costs at (%d,%d) must be finite", s, a));
        }
    }
    if (!report.ok) return report;

    for (int a = 0; a < model.actions[0]; ++a) {
        if (model.transition[0][a][0] != 1.0)
            fail(fmt("terminal state must be absorbing, action %d leaks mass", a, 0));
        if (model.cost_g[0][a] != 0.0 || model.cost_c[0][a] != 0.0)
            fail(fmt("terminal state must be cost-free, action %d has a cost", a, 0));
    }

    // Reverse BFS from the terminal over support edges.
    std::vector<char> reaches(n, 0);
    reaches[0] = 1;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        for (int s = 0; s < n; ++s) {
            if (reaches[s]) continue;
            bool edge = false;
            for (int a = 0; a < model.actions[s] && !edge; ++a)
                edge = model.transition[s][a][t] > 0.0;
            if (edge) {
                reaches[s] = 1;
                queue.push_back(s);
            }
        }
    }
    for (int s = 1; s < n; ++s)
        if (!reaches[s])
            fail(fmt("state %d cannot reach the terminal state in the support graph", s));

    if (model.start_state < 1 || model.start_state >= n)
        fail(fmt("start_state %d is not a transient state", model.start_state));

    return report;
}

}  // namespace cvarssp
