#include "maple/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace maple {

const char* primitive_name(PrimitiveId id) {
  switch (id) {
    case PrimitiveId::Reach:
      return "reach";
    case PrimitiveId::Grasp:
      return "grasp";
    case PrimitiveId::Push:
      return "push";
    case PrimitiveId::Release:
      return "release";
    case PrimitiveId::Atomic:
      return "atomic";
  }
  throw std::invalid_argument("unknown primitive id");
}

PrimitiveId primitive_from_name(const std::string& name) {
  if (name == "reach") return PrimitiveId::Reach;
  if (name == "grasp") return PrimitiveId::Grasp;
  if (name == "push") return PrimitiveId::Push;
  if (name == "release") return PrimitiveId::Release;
  if (name == "atomic") return PrimitiveId::Atomic;
  throw std::invalid_argument("unknown primitive name: " + name);
}

static double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

AtomicAction::AtomicAction(const std::array<double, kControlDim>& raw) {
  for (int i = 0; i < kControlDim; ++i) u[i] = clamp1(raw[i]);
}

AtomicAction::AtomicAction(const Vec& raw) {
  if (raw.size() < kControlDim)
    throw std::invalid_argument("atomic action needs 5 components");
  for (int i = 0; i < kControlDim; ++i) u[i] = clamp1(raw[i]);
}

ParamBounds ParamBounds::defaults() {
  ParamBounds b;
  b.reach = {{-0.15, 0.15}, {-0.15, 0.15}, {0.01, 0.20}};
  b.grasp = {{-0.15, 0.15}, {-0.15, 0.15}, {0.01, 0.20}, {-0.5, 0.5}};
  b.push = {{-0.15, 0.15}, {-0.15, 0.15}, {0.01, 0.10}, {-0.5, 0.5},
            {-0.10, 0.10}, {-0.10, 0.10}, {-0.05, 0.05}};
  return b;
}

PrimitiveLibrary::PrimitiveLibrary(std::vector<PrimitiveSpec> specs)
    : specs_(std::move(specs)) {
  for (const auto& s : specs_) {
    if (static_cast<int>(s.bounds.size()) != s.param_dim)
      throw std::invalid_argument("primitive bounds/param_dim mismatch");
    max_param_dim_ = std::max(max_param_dim_, s.param_dim);
  }
}

static std::vector<ParamRange> raw_bounds(int n) {
  return std::vector<ParamRange>(n, ParamRange{-1.0, 1.0});
}

PrimitiveLibrary PrimitiveLibrary::full(const ParamBounds& bounds) {
  std::vector<PrimitiveSpec> s;
  s.push_back({PrimitiveId::Reach, 3, 15, bounds.reach});
  s.push_back({PrimitiveId::Grasp, 4, 20, bounds.grasp});
  s.push_back({PrimitiveId::Push, 7, 20, bounds.push});
  s.push_back({PrimitiveId::Release, 0, 4, {}});
  s.push_back({PrimitiveId::Atomic, kControlDim, 1, raw_bounds(kControlDim)});
  return PrimitiveLibrary(std::move(s));
}

PrimitiveLibrary PrimitiveLibrary::non_atomic(const ParamBounds& bounds) {
  std::vector<PrimitiveSpec> s;
  s.push_back({PrimitiveId::Reach, 3, 15, bounds.reach});
  s.push_back({PrimitiveId::Grasp, 4, 20, bounds.grasp});
  s.push_back({PrimitiveId::Push, 7, 20, bounds.push});
  s.push_back({PrimitiveId::Release, 0, 4, {}});
  return PrimitiveLibrary(std::move(s));
}

PrimitiveLibrary PrimitiveLibrary::atomic_only() {
  std::vector<PrimitiveSpec> s;
  s.push_back({PrimitiveId::Atomic, kControlDim, 1, raw_bounds(kControlDim)});
  return PrimitiveLibrary(std::move(s));
}

const PrimitiveSpec& PrimitiveLibrary::spec(int index) const {
  if (index < 0 || index >= size())
    throw std::invalid_argument("primitive index out of range");
  return specs_[static_cast<size_t>(index)];
}

int PrimitiveLibrary::index_of(PrimitiveId id) const {
  for (int i = 0; i < size(); ++i)
    if (specs_[static_cast<size_t>(i)].id == id) return i;
  return -1;
}

Vec PrimitiveLibrary::truncate_params(const Vec& full, int index) const {
  const PrimitiveSpec& s = spec(index);
  if (full.size() != max_param_dim_)
    throw std::invalid_argument("parameter vector width mismatch");
  Vec out(s.param_dim);
  for (int i = 0; i < s.param_dim; ++i) {
    double x = clamp1(full[i]);
    const ParamRange& r = s.bounds[static_cast<size_t>(i)];
    out[i] = r.lo + 0.5 * (x + 1.0) * (r.hi - r.lo);
  }
  return out;
}

}  // namespace maple
