// Copyright 2026 The Bystander Authors
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

#include <string>

#include "bystander/types.hpp"

namespace bystander {

// Qubit basis order: index 0 = |up> (excited), index 1 = |dn>.

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
/// sigma = |dn><up|.
Matrix lowering();
/// sigma^dag = |up><dn|.
Matrix raising();

/// Single-qubit Pauli for one of I, X, Y, Z (case-insensitive).
Matrix pauli(char label);

/// Tensor product of single-qubit Paulis; the first character acts on the
/// slowest index. Throws DomainError on an empty string or unknown letter.
Matrix pauli_string(const std::string& labels);

}  // namespace bystander
