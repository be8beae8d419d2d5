// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tokenadapt {

/// Operand shapes do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (empty input, missing modality, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A retention budget cannot be honoured (K > |V|, k > candidates).
class BudgetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Normalised time weights with |sum w| at or below the guard.
class DegenerateWeightsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A component returned something that violates an interface contract,
/// e.g. a sparsifier selecting an out-of-range or non-visual row.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed or unknown configuration input. `where` names the field or line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace tokenadapt
