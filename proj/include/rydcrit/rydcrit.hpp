// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file rydcrit.hpp
 * @brief Umbrella header for the rydcrit library.
 */

#pragma once

#include <rydcrit/binary_io.hpp>
#include <rydcrit/dense_state.hpp>
#include <rydcrit/dmrg.hpp>
#include <rydcrit/errors.hpp>
#include <rydcrit/hamiltonian.hpp>
#include <rydcrit/lanczos.hpp>
#include <rydcrit/lattice_basis.hpp>
#include <rydcrit/measurement.hpp>
#include <rydcrit/mpo.hpp>
#include <rydcrit/mps.hpp>
#include <rydcrit/observables.hpp>
#include <rydcrit/pattern.hpp>
#include <rydcrit/pipeline.hpp>
#include <rydcrit/scaling.hpp>
#include <rydcrit/shots.hpp>
#include <rydcrit/solve.hpp>
#include <rydcrit/version.hpp>
#include <rydcrit/wavefunction.hpp>
