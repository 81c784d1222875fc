#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cvarssp/model.hpp"

namespace cvarssp {

class UnknownEnvironment : public std::invalid_argument {
  public:
    explicit UnknownEnvironment(const std::string& name)
        : std::invalid_argument("unknown environment '" + name +
                                "'; available: bandit-ssp, chain, gridworld-trap") {}
};

/**
 * bandit-ssp: three states, start at 1.
 *   a0: straight to the terminal, g = 1, c = 1.
 *   a1: g = c = 0, terminal w.p. 0.9, detour to state 2 w.p. 0.1;
 *       state 2 exits with c = 20.
 * Total risk cost under a1 is 0 w.p. 0.9 and 20 w.p. 0.1.
 */
SspModel make_bandit_ssp();

/**
 * chain: five states, a random walk from 4 down to 0.  Each transient state
 * offers a steady step (advance w.p. 1, g = 2, c = 1) and a brisk step
 * (advance w.p. 0.8, stall w.p. 0.2, g = 1, c = 1.5).  Brisk play is cheaper
 * in g on average but has a stall-driven tail in c.
 */
SspModel make_chain();

/**
 * gridworld-trap: 4x4 grid, 17 states (16 cells plus the terminal), start at
 * cell (0,0), exit through the corner cell (3,3).  Two actions per cell
 * (right, down) with a 0.15 slip to the other direction; moves off the grid
 * are redirected to the remaining valid direction, so every episode takes
 * exactly 7 steps.  g is a per-cell toll; the trap cell (0,2) sits on the
 * cheap route and is the only source of risk cost (c = 40).
 * 32 tabular parameters.
 */
SspModel make_gridworld_trap();

/// Lookup by CLI name; throws UnknownEnvironment.
SspModel builtin_environment(const std::string& name);

std::vector<std::string> builtin_environment_names();

}  // namespace cvarssp
