#pragma once

#include "swerve/assimilation.hpp"
#include "swerve/core.hpp"
#include "swerve/errors.hpp"
#include "swerve/io.hpp"
#include "swerve/quadratic.hpp"
#include "swerve/symreg/search.hpp"
#include "swerve/symreg/sinusoid.hpp"
#include "swerve/synth.hpp"
#include "swerve/ukf.hpp"
#include "swerve/version.hpp"
