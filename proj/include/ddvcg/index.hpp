#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 ddvcg authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cassert>
#include <vector>

namespace ddvcg {

// Mixed-radix flat index over a product of finite axes.
// Axis 0 is the slowest-varying one.
class IndexProduct {
 public:
  IndexProduct() = default;

  explicit IndexProduct(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    strides_.assign(sizes_.size(), 1);
    total_ = sizes_.empty() ? 1 : 1;
    for (int a = static_cast<int>(sizes_.size()) - 1; a >= 0; --a) {
      assert(sizes_[a] > 0);
      strides_[a] = total_;
      total_ *= sizes_[a];
    }
  }

  int size() const { return total_; }
  int axes() const { return static_cast<int>(sizes_.size()); }
  int axis_size(int a) const { return sizes_[a]; }

  int flatten(const std::vector<int>& idx) const {
    assert(idx.size() == sizes_.size());
    int flat = 0;
    for (size_t a = 0; a < sizes_.size(); ++a) flat += idx[a] * strides_[a];
    return flat;
  }

  std::vector<int> unflatten(int flat) const {
    std::vector<int> idx(sizes_.size());
    for (size_t a = 0; a < sizes_.size(); ++a) {
      idx[a] = (flat / strides_[a]) % sizes_[a];
    }
    return idx;
  }

  int coordinate(int flat, int axis) const { return (flat / strides_[axis]) % sizes_[axis]; }

  // Flat index with one coordinate replaced.
  int replace(int flat, int axis, int value) const {
    return flat + (value - coordinate(flat, axis)) * strides_[axis];
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int total_ = 1;
};

// Joint report space over all agents' (theta, signal) grids.
// Axes are ordered [theta_0, ..., theta_{n-1}, s_0, ..., s_{n-1}].
class ProfileSpace {
 public:
  ProfileSpace() = default;

  ProfileSpace(const std::vector<int>& theta_sizes, const std::vector<int>& sig_sizes)
      : n_(static_cast<int>(theta_sizes.size())) {
    std::vector<int> all(theta_sizes);
    all.insert(all.end(), sig_sizes.begin(), sig_sizes.end());
    joint_ = IndexProduct(all);
    sig_space_ = IndexProduct(sig_sizes);
    theta_space_ = IndexProduct(theta_sizes);
    excl_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      std::vector<int> rest;
      for (int j = 0; j < n_; ++j)
        if (j != i) rest.push_back(theta_sizes[j]);
      for (int j = 0; j < n_; ++j)
        if (j != i) rest.push_back(sig_sizes[j]);
      excl_[i] = IndexProduct(rest);
    }
  }

  int num_agents() const { return n_; }
  int size() const { return joint_.size(); }
  int theta_of(int flat, int agent) const { return joint_.coordinate(flat, agent); }
  int sig_of(int flat, int agent) const { return joint_.coordinate(flat, n_ + agent); }

  int flatten(const std::vector<int>& theta_idx, const std::vector<int>& sig_idx) const {
    std::vector<int> all(theta_idx);
    all.insert(all.end(), sig_idx.begin(), sig_idx.end());
    return joint_.flatten(all);
  }

  std::vector<int> theta_idx(int flat) const {
    std::vector<int> t(n_);
    for (int i = 0; i < n_; ++i) t[i] = theta_of(flat, i);
    return t;
  }

  std::vector<int> sig_idx(int flat) const {
    std::vector<int> s(n_);
    for (int i = 0; i < n_; ++i) s[i] = sig_of(flat, i);
    return s;
  }

  // Unilateral deviation of one agent's (theta, signal) report.
  int deviate(int flat, int agent, int theta_k, int sig_k) const {
    int f = joint_.replace(flat, agent, theta_k);
    return joint_.replace(f, n_ + agent, sig_k);
  }

  // Flat index of the joint signal profile (for posterior lookups).
  int sig_flat(int flat) const {
    int f = 0;
    for (int i = 0; i < n_; ++i) f = f * sig_space_.axis_size(i) + sig_of(flat, i);
    return f;
  }

  int theta_flat(int flat) const {
    int f = 0;
    for (int i = 0; i < n_; ++i) f = f * theta_space_.axis_size(i) + theta_of(flat, i);
    return f;
  }

  const IndexProduct& signal_space() const { return sig_space_; }
  const IndexProduct& theta_space() const { return theta_space_; }

  // Flat index of the profile with agent i removed, over the (n-1)-agent space.
  int excl_flat(int flat, int agent) const {
    std::vector<int> rest;
    rest.reserve(2 * (n_ - 1));
    for (int j = 0; j < n_; ++j)
      if (j != agent) rest.push_back(theta_of(flat, j));
    for (int j = 0; j < n_; ++j)
      if (j != agent) rest.push_back(sig_of(flat, j));
    return excl_[agent].flatten(rest);
  }

  const IndexProduct& excl_space(int agent) const { return excl_[agent]; }

 private:
  int n_ = 0;
  IndexProduct joint_;
  IndexProduct sig_space_;
  IndexProduct theta_space_;
  std::vector<IndexProduct> excl_;
};

}  // namespace ddvcg
