/*
   Copyright 2026 The atomchip Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace atomchip {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: unknown keys, malformed files, violated preconditions.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Field requested within the exclusion radius of a filament.
class SingularityError : public Error {
public:
    SingularityError(const std::string& conductor, const Eigen::Vector3d& point, const std::string& context = {});
    const std::string& conductor() const noexcept { return conductor_; }
    const Eigen::Vector3d& point() const noexcept { return point_; }

private:
    std::string conductor_;
    Eigen::Vector3d point_;
};

class NoTrapError : public Error {
public:
    using Error::Error;
};

class UnphysicalTrapError : public Error {
public:
    using Error::Error;
};

class SaddlePointError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

}  // namespace atomchip
