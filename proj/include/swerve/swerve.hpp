#pragma once

// Convenience umbrella header.

#include "swerve/adam.hpp"
#include "swerve/agents.hpp"
#include "swerve/bench.hpp"
#include "swerve/checkpoint.hpp"
#include "swerve/config.hpp"
#include "swerve/dynamics.hpp"
#include "swerve/env.hpp"
#include "swerve/gae.hpp"
#include "swerve/geometry.hpp"
#include "swerve/mlp.hpp"
#include "swerve/mpc.hpp"
#include "swerve/plots.hpp"
#include "swerve/policy.hpp"
#include "swerve/ppo.hpp"
#include "swerve/raycast.hpp"
#include "swerve/rng.hpp"
#include "swerve/scenario.hpp"
#include "swerve/scene.hpp"
