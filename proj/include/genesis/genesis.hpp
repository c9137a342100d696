// Copyright 2026 The Genesis Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "genesis/dataset.hpp"
#include "genesis/error.hpp"
#include "genesis/experiments.hpp"
#include "genesis/metrics.hpp"
#include "genesis/patch.hpp"
#include "genesis/restorer.hpp"
#include "genesis/run_config.hpp"
#include "genesis/rng.hpp"
#include "genesis/scheme.hpp"
#include "genesis/transforms.hpp"
#include "genesis/volume.hpp"
