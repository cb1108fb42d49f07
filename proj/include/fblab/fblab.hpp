// fblab/fblab.hpp

// Copyright 2026 The fblab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "fblab/codec.hpp"
#include "fblab/dsp_core.hpp"
#include "fblab/erb.hpp"
#include "fblab/error.hpp"
#include "fblab/filterbank.hpp"
#include "fblab/gammatone.hpp"
#include "fblab/sep_lab.hpp"
#include "fblab/stft_bank.hpp"
#include "fblab/wav.hpp"
