#pragma once

#include <touchloc/action.hpp>
#include <touchloc/scene.hpp>

#include <algorithm>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace touchloc {

/// Runs `fn(i)` for i in [0, n), split into contiguous chunks over `threads`.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Dense |actions| x |particles| table of contact times a_phi (+inf for
/// NoContact), row-major by action index.
class ContactTable {
 public:
  ContactTable() = default;
  ContactTable(std::size_t actions, std::size_t particles)
      : actions_(actions), particles_(particles), data_(actions * particles, kNoContact) {}

  static ContactTable build(std::span<const Action> actions, std::span<const Pose> poses,
                            const Scene& scene, int threads = 1) {
    ContactTable t(actions.size(), poses.size());
    parallel_for(actions.size(), threads, [&](std::size_t a) {
      double* out = t.data_.data() + a * t.particles_;
      for (std::size_t i = 0; i < poses.size(); ++i) {
        out[i] = scene.contact_time(actions[a], poses[i]).raw();
      }
    });
    return t;
  }

  static ContactTable from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    ContactTable t(rows.size(), rows.front().size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a].size() != t.particles_) throw std::invalid_argument("ragged contact rows");
      std::copy(rows[a].begin(), rows[a].end(), t.data_.begin() + a * t.particles_);
    }
    return t;
  }

  std::span<const double> row(std::size_t action_index) const {
    return {data_.data() + action_index * particles_, particles_};
  }
  std::span<double> mutable_row(std::size_t action_index) {
    return {data_.data() + action_index * particles_, particles_};
  }
  double at(std::size_t action_index, std::size_t particle) const {
    return data_[action_index * particles_ + particle];
  }

  std::size_t action_count() const { return actions_; }
  std::size_t particle_count() const { return particles_; }

 private:
  std::size_t actions_ = 0;
  std::size_t particles_ = 0;
  std::vector<double> data_;
};

}  // namespace touchloc
