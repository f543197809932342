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

#include "bystander/pauli.hpp"

#include <cctype>

#include "bystander/tensor.hpp"

namespace bystander {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

Matrix raising() { return lowering().adjoint(); }

Matrix pauli(char label) {
  switch (std::toupper(static_cast<unsigned char>(label))) {
    case 'I':
      return Matrix::Identity(2, 2);
    case 'X':
      return pauli_x();
    case 'Y':
      return pauli_y();
    case 'Z':
      return pauli_z();
    default:
      throw DomainError(std::string("unknown Pauli label '") + label + "'");
  }
}

Matrix pauli_string(const std::string& labels) {
  if (labels.empty()) throw DomainError("empty Pauli string");
  Matrix out = pauli(labels.front());
  for (std::size_t k = 1; k < labels.size(); ++k) out = kron(out, pauli(labels[k]));
  return out;
}

}  // namespace bystander
