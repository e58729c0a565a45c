// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edrnn/decoder.hpp"
#include "edrnn/engine.hpp"
#include "edrnn/error.hpp"
#include "edrnn/features.hpp"
#include "edrnn/fixedpoint.hpp"
#include "edrnn/gru_reference.hpp"
#include "edrnn/model.hpp"
#include "edrnn/model_io.hpp"
#include "edrnn/perfmodel.hpp"
#include "edrnn/report.hpp"
#include "edrnn/synth.hpp"
