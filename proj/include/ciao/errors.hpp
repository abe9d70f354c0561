// Copyright 2026 The ciao-star Authors
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

#include <stdexcept>
#include <string>

namespace ciao {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gradient walk out of an obstacle did not reach free space.
class InfeasibleCenter : public Error {
 public:
  using Error::Error;
};

// Obstacle motion data does not cover the requested time interval.
class PredictionHorizonExceeded : public Error {
 public:
  using Error::Error;
};

// Tightened path constraints admit no point.
class EmptyTightenedSet : public Error {
 public:
  using Error::Error;
};

// A free region is smaller than the action radius.
class NegativeRadius : public Error {
 public:
  NegativeRadius(const std::string& what, int knot, double radius)
      : Error(what), knot_(knot), radius_(radius) {}
  int knot() const { return knot_; }
  double radius() const { return radius_; }

 private:
  int knot_;
  double radius_;
};

// The conic solver did not return an optimal point.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// Grid search found no path between start and goal.
class NoPath : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

class NoReference : public Error {
 public:
  using Error::Error;
};

// Malformed input document (scenario, trajectory, suite).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ciao
