// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The vibe-beam authors
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

#include <stdexcept>
#include <string>

namespace vibe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two entities share a position, or a distance is non-positive.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// A pixel abscissa lies outside the image.
class OutOfFrame : public Error {
public:
    using Error::Error;
};

/// A camera-frame angle at or beyond +-90 degrees has no image projection.
class BehindCamera : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ModelNotReady : public Error {
public:
    using Error::Error;
};

/// Time outside a trajectory's domain.
class OutOfRange : public Error {
public:
    using Error::Error;
};

}  // namespace vibe
