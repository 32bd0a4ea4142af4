// Copyright 2026 The wkm Authors
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

#include "wkm/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "wkm/error.hpp"

namespace wkm {
namespace {

std::string record_label(std::size_t i) { return "record " + std::to_string(i); }

// Indices of event records grouped by equal time, only groups of size > 1.
std::vector<std::vector<std::size_t>> tied_event_groups(
    const std::vector<SubjectRecord>& records) {
  std::vector<std::size_t> events;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].event == 1) events.push_back(i);
  }
  // stable so that within-tie rank follows record order
  std::stable_sort(events.begin(), events.end(), [&](std::size_t a, std::size_t b) {
    return records[a].time < records[b].time;
  });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < events.size();) {
    std::size_t m = k + 1;
    while (m < events.size() && records[events[m]].time == records[events[k]].time) ++m;
    if (m - k > 1) groups.emplace_back(events.begin() + k, events.begin() + m);
    k = m;
  }
  return groups;
}

}  // namespace

Dataset Dataset::validate(std::vector<SubjectRecord> records, ValidationOptions options) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no records");

  const std::size_t p = records.front().covariates.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.covariates.empty() || r.covariates.front() != 1.0) {
      throw Error(ErrorCode::MissingInterceptColumn,
                  record_label(i) + ": first covariate must be the constant 1");
    }
    if (r.covariates.size() != p) {
      throw Error(ErrorCode::InconsistentCovariateLength,
                  record_label(i) + " has " + std::to_string(r.covariates.size()) +
                      " covariates, expected " + std::to_string(p));
    }
    if (!std::isfinite(r.time) || r.time < 0.0) {
      throw Error(ErrorCode::NegativeTime,
                  record_label(i) + ": time must be finite and nonnegative");
    }
    if ((r.event != 0 && r.event != 1) || (r.treatment != 0 && r.treatment != 1)) {
      throw Error(ErrorCode::NonBinaryIndicator,
                  record_label(i) + ": event and treatment must be 0 or 1");
    }
    for (double z : r.covariates) {
      if (!std::isfinite(z)) {
        throw Error(ErrorCode::ParseError, record_label(i) + ": non-finite covariate");
      }
    }
  }

  auto groups = tied_event_groups(records);
  if (!groups.empty() && options.jitter_ties) {
    double max_time = 0.0;
    for (const auto& r : records) max_time = std::max(max_time, r.time);
    const double eps = 1e-9 * max_time;
    for (const auto& group : groups) {
      for (std::size_t rank = 1; rank < group.size(); ++rank) {
        records[group[rank]].time += static_cast<double>(rank) * eps;
      }
    }
    groups = tied_event_groups(records);
  }
  if (!groups.empty()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "failure times shared by more than one subject:";
    for (const auto& group : groups) msg << ' ' << records[group.front()].time;
    throw Error(ErrorCode::TiedFailureTimes, msg.str());
  }

  Dataset data;
  data.p_ = p;
  for (const auto& r : records) {
    ++data.arm_sizes_[r.treatment];
    if (r.event == 1) ++data.event_counts_[r.treatment];
  }
  data.records_ = std::move(records);
  return data;
}

}  // namespace wkm
