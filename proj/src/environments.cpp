#include "cvarssp/environments.hpp"

namespace cvarssp {

namespace {

SspModel blank_model(int num_states, const std::vector<int>& actions) {
    SspModel m;
    m.num_states = num_states;
    m.actions = actions;
    m.transition.assign(num_states, {});
    m.cost_g.assign(num_states, {});
    m.cost_c.assign(num_states, {});
    for (int s = 0; s < num_states; ++s) {
        m.transition[s].assign(actions[s], std::vector<double>(num_states, 0.0));
        m.cost_g[s].assign(actions[s], 0.0);
        m.cost_c[s].assign(actions[s], 0.0);
    }
    for (int a = 0; a < actions[0]; ++a) m.transition[0][a][0] = 1.0;
    return m;
}

}  // namespace

SspModel make_bandit_ssp() {
    SspModel m = blank_model(3, {1, 2, 1});
    m.start_state = 1;

    m.transition[1][0][0] = 1.0;
    m.cost_g[1][0] = 1.0;
    m.cost_c[1][0] = 1.0;

    m.transition[1][1][0] = 0.9;
    m.transition[1][1][2] = 0.1;

    m.transition[2][0][0] = 1.0;
    m.cost_c[2][0] = 20.0;
    return m;
}

SspModel make_chain() {
    SspModel m = blank_model(5, {1, 2, 2, 2, 2});
    m.start_state = 4;
    for (int s = 1; s <= 4; ++s) {
        m.transition[s][0][s - 1] = 1.0;
        m.cost_g[s][0] = 2.0;
        m.cost_c[s][0] = 1.0;

        m.transition[s][1][s - 1] = 0.8;
        m.transition[s][1][s] = 0.2;
        m.cost_g[s][1] = 1.0;
        m.cost_c[s][1] = 1.5;
    }
    return m;
}

SspModel make_gridworld_trap() {
    constexpr int kSide = 4;
    constexpr double kSlip = 0.15;
    const double toll[kSide][kSide] = {
        {1.0, 1.0, 0.4, 1.0},
        {1.0, 1.2, 1.0, 1.0},
        {2.0, 2.0, 1.2, 1.0},
        {2.5, 2.0, 1.5, 0.0},
    };

    SspModel m = blank_model(17, std::vector<int>(17, 2));
    m.actions[0] = 1;
    m.transition[0] = {std::vector<double>(17, 0.0)};
    m.transition[0][0][0] = 1.0;
    m.cost_g[0] = {0.0};
    m.cost_c[0] = {0.0};
    m.start_state = 1;

    auto cell_state = [](int row, int col) { return 1 + kSide * row + col; };
    auto target = [&](int row, int col, int dir) {
        // dir 0 = right, 1 = down; off-grid moves fall through to the other
        // direction, which is always valid away from the goal cell.
        if (dir == 0 && col + 1 >= kSide) dir = 1;
        if (dir == 1 && row + 1 >= kSide) dir = 0;
        return (dir == 0) ? cell_state(row, col + 1) : cell_state(row + 1, col);
    };

    for (int row = 0; row < kSide; ++row) {
        for (int col = 0; col < kSide; ++col) {
            const int s = cell_state(row, col);
            const bool goal = row == kSide - 1 && col == kSide - 1;
            const bool trap = row == 0 && col == 2;
            for (int a = 0; a < 2; ++a) {
                m.cost_g[s][a] = toll[row][col];
                m.cost_c[s][a] = trap ? 40.0 : 0.0;
                if (goal) {
                    m.transition[s][a][0] = 1.0;
                    continue;
                }
                m.transition[s][a][target(row, col, a)] += 1.0 - kSlip;
                m.transition[s][a][target(row, col, 1 - a)] += kSlip;
            }
        }
    }
    return m;
}

SspModel builtin_environment(const std::string& name) {
    if (name == "bandit-ssp") return make_bandit_ssp();
    if (name == "chain") return make_chain();
    if (name == "gridworld-trap") return make_gridworld_trap();
    throw UnknownEnvironment(name);
}

std::vector<std::string> builtin_environment_names() {
    return {"bandit-ssp", "chain", "gridworld-trap"};
}

}  // namespace cvarssp
