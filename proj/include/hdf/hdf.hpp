/*
 * Copyright 2026 The HDF Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header for the hybrid deep feature toolkit.

#include "hdf/benchmark.hpp"
#include "hdf/classifier.hpp"
#include "hdf/dataset.hpp"
#include "hdf/engine.hpp"
#include "hdf/experiment.hpp"
#include "hdf/feature_cache.hpp"
#include "hdf/features.hpp"
#include "hdf/image.hpp"
#include "hdf/model_io.hpp"
#include "hdf/network.hpp"
#include "hdf/ops.hpp"
#include "hdf/slicer.hpp"
#include "hdf/synthetic.hpp"
#include "hdf/tensor.hpp"
#include "hdf/weights.hpp"
