// Copyright 2026 The enttrade developers.
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

#ifndef ENTTRADE_ENTTRADE_HPP
#define ENTTRADE_ENTTRADE_HPP

#include "enttrade/choi.hpp"
#include "enttrade/fidelity.hpp"
#include "enttrade/haar.hpp"
#include "enttrade/instrument.hpp"
#include "enttrade/tensor.hpp"

#endif  // ENTTRADE_ENTTRADE_HPP
