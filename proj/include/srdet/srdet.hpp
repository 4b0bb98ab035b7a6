// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef SRDET_SRDET_HPP_
#define SRDET_SRDET_HPP_

#include "srdet/app.hpp"
#include "srdet/base64.hpp"
#include "srdet/config.hpp"
#include "srdet/dedup.hpp"
#include "srdet/denoise.hpp"
#include "srdet/detection.hpp"
#include "srdet/detector.hpp"
#include "srdet/error.hpp"
#include "srdet/evalmap.hpp"
#include "srdet/geometry.hpp"
#include "srdet/imagebuf.hpp"
#include "srdet/pipeline.hpp"
#include "srdet/png.hpp"
#include "srdet/remote.hpp"
#include "srdet/report.hpp"
#include "srdet/superres.hpp"
#include "srdet/synthdet.hpp"
#include "srdet/transport.hpp"
#include "srdet/wire.hpp"

#endif  // SRDET_SRDET_HPP_
