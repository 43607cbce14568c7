/*
 Copyright 2026 The handsoff authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include "handsoff/io.hpp"
#include "handsoff/lti.hpp"
#include "handsoff/oracle1d.hpp"
#include "handsoff/problem.hpp"
#include "handsoff/rng.hpp"
#include "handsoff/selftrig.hpp"
#include "handsoff/signals.hpp"
#include "handsoff/solver.hpp"
#include "handsoff/sparse_control.hpp"
#include "handsoff/transcription.hpp"
