// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#pragma once

#include "lapa/allocators.hpp"
#include "lapa/channel.hpp"
#include "lapa/config.hpp"
#include "lapa/core.hpp"
#include "lapa/detection.hpp"
#include "lapa/estimation.hpp"
#include "lapa/harness.hpp"
#include "lapa/los_metric.hpp"
#include "lapa/model.hpp"
#include "lapa/pilots.hpp"
#include "lapa/stats.hpp"
