#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trn/matrix.hpp"

namespace trn {

// Mutable view onto one named parameter block. Model parameter structs
// expose their weights as an ordered list of these; the optimizer, the
// gradient checker and the checkpoint writer all walk the same list.
template <typename S>
struct ParamView {
  std::string name;
  S* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
};

template <typename S>
ParamView<S> view(std::string name, Matrix<S>& m) {
  return ParamView<S>{std::move(name), m.data.data(), m.rows, m.cols};
}

template <typename S>
ParamView<S> view(std::string name, Vector<S>& v) {
  return ParamView<S>{std::move(name), v.data(), v.size(), 1};
}

template <typename S>
void append(std::vector<ParamView<S>>& out, std::vector<ParamView<S>> more) {
  for (auto& b : more) out.push_back(std::move(b));
}

}  // namespace trn
