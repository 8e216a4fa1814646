// Copyright 2026 The dpvote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPVOTE_DPVOTE_H_
#define DPVOTE_DPVOTE_H_

#include "dpvote/accountant.hpp"
#include "dpvote/analysis.hpp"
#include "dpvote/ballots.hpp"
#include "dpvote/math.hpp"
#include "dpvote/mechanisms.hpp"
#include "dpvote/metrics.hpp"
#include "dpvote/rng.hpp"
#include "dpvote/simulation.hpp"

#endif  // DPVOTE_DPVOTE_H_
