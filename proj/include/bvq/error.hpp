// Copyright 2026 The bvq Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace bvq {

class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Vector length does not match the problem or model it is evaluated against.
class DimensionError : public Error {
 public:
    using Error::Error;
};

// A value violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
    using Error::Error;
};

// Malformed text while reading one of the on-disk formats.
class FormatError : public Error {
 public:
    using Error::Error;
};

// Bad configuration file or configuration invariant violation.
class ConfigError : public Error {
 public:
    using Error::Error;
};

// A required input file does not exist or cannot be opened.
class MissingInputError : public Error {
 public:
    using Error::Error;
};

}  // namespace bvq
