#include "negvol/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "negvol/parallel.hpp"

namespace negvol {

std::vector<std::array<int, 3>> StructuringElement::offsets() const {
  if (radius < 1) fail(ErrorKind::Config, "structuring element radius must be >= 1");
  std::vector<std::array<int, 3>> out;
  const int r = radius;
  for (int dz = -r; dz <= r; ++dz) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (shape == Shape::Ball && dx * dx + dy * dy + dz * dz > r * r) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

namespace {

struct RowSpan {
  int dy;
  int dz;
  int half_width;
};

// The element as a set of x-runs centered on each (dy,dz).
std::vector<RowSpan> row_spans(const StructuringElement& se) {
  if (se.radius < 1) fail(ErrorKind::Config, "structuring element radius must be >= 1");
  const int r = se.radius;
  std::vector<RowSpan> spans;
  for (int dz = -r; dz <= r; ++dz) {
    for (int dy = -r; dy <= r; ++dy) {
      if (se.shape == StructuringElement::Shape::Cube) {
        spans.push_back({dy, dz, r});
        continue;
      }
      const int rem = r * r - dy * dy - dz * dz;
      if (rem < 0) continue;
      int w = static_cast<int>(std::sqrt(static_cast<double>(rem)));
      while ((w + 1) * (w + 1) <= rem) ++w;
      while (w * w > rem) --w;
      spans.push_back({dy, dz, w});
    }
  }
  return spans;
}

BinaryMask morph(const BinaryMask& m, const StructuringElement& se, bool is_dilate) {
  const auto spans = row_spans(se);
  const GridGeometry& geo = m.geometry();
  const long nx = static_cast<long>(geo.nx());
  const long ny = static_cast<long>(geo.ny());
  const long nz = static_cast<long>(geo.nz());
  BinaryMask out(geo, is_dilate ? 0 : 1);

  parallel_for(0, geo.nz(), [&](std::size_t kk) {
    const long k = static_cast<long>(kk);
    std::vector<int> prefix(nx + 1);
    std::vector<std::uint8_t> acc(nx);
    for (long j = 0; j < ny; ++j) {
      std::fill(acc.begin(), acc.end(), is_dilate ? 0 : 1);
      for (const auto& s : spans) {
        const long sj = j + s.dy, sk = k + s.dz;
        if (sj < 0 || sj >= ny || sk < 0 || sk >= nz) {
          if (!is_dilate) std::fill(acc.begin(), acc.end(), 0);
          continue;
        }
        const std::uint8_t* row = &m[geo.index(0, sj, sk)];
        prefix[0] = 0;
        for (long i = 0; i < nx; ++i) prefix[i + 1] = prefix[i] + (row[i] != 0);
        const long w = s.half_width;
        for (long i = 0; i < nx; ++i) {
          const long lo = i - w, hi = i + w;
          const int hits = prefix[std::min(hi, nx - 1) + 1] - prefix[std::max(lo, 0L)];
          if (is_dilate) {
            if (hits > 0) acc[i] = 1;
          } else if (lo < 0 || hi >= nx || hits != 2 * w + 1) {
            acc[i] = 0;
          }
        }
      }
      std::copy(acc.begin(), acc.end(), &out[geo.index(0, j, k)]);
    }
  });
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m, const StructuringElement& se) { return morph(m, se, false); }

BinaryMask dilate(const BinaryMask& m, const StructuringElement& se) { return morph(m, se, true); }

BinaryMask close(const BinaryMask& m, const StructuringElement& se) {
  return erode(dilate(m, se), se);
}

BinaryMask open(const BinaryMask& m, const StructuringElement& se) {
  return dilate(erode(m, se), se);
}

std::uint32_t ComponentLabels::largest() const {
  std::uint32_t best = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    if (best == 0 || sizes[l] > sizes[best]) best = static_cast<std::uint32_t>(l);
  }
  return best;
}

ComponentLabels label_components(const BinaryMask& m) {
  const GridGeometry& geo = m.geometry();
  ComponentLabels out;
  out.labels.assign(m.size(), 0);
  out.sizes.push_back(0);
  std::deque<std::size_t> queue;
  const long nx = static_cast<long>(geo.nx());
  const long ny = static_cast<long>(geo.ny());
  for (std::size_t seed = 0; seed < m.size(); ++seed) {
    if (!m[seed] || out.labels[seed] != 0) continue;
    const auto label = static_cast<std::uint32_t>(out.sizes.size());
    std::size_t size = 0;
    out.labels[seed] = label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t n = queue.front();
      queue.pop_front();
      ++size;
      const long i = static_cast<long>(n % geo.nx());
      const long j = static_cast<long>((n / geo.nx()) % geo.ny());
      const long k = static_cast<long>(n / (geo.nx() * geo.ny()));
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (!geo.contains(i + dx, j + dy, k + dz)) continue;
            const std::size_t q =
                static_cast<std::size_t>((i + dx) + nx * ((j + dy) + ny * (k + dz)));
            if (m[q] && out.labels[q] == 0) {
              out.labels[q] = label;
              queue.push_back(q);
            }
          }
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

BinaryMask remove_small_components(const BinaryMask& m, std::size_t min_voxels) {
  if (min_voxels < 1) fail(ErrorKind::Config, "remove_small_components: min_voxels must be >= 1");
  const auto cc = label_components(m);
  if (cc.component_count() == 0) return m;
  const std::uint32_t keep_always = cc.largest();
  std::vector<std::uint8_t> keep(cc.sizes.size(), 0);
  for (std::size_t l = 1; l < cc.sizes.size(); ++l) {
    keep[l] = (cc.sizes[l] >= min_voxels || l == keep_always) ? 1 : 0;
  }
  BinaryMask out(m.geometry());
  for (std::size_t n = 0; n < m.size(); ++n) out[n] = keep[cc.labels[n]];
  return out;
}

BinaryMask largest_component(const BinaryMask& m) {
  const auto cc = label_components(m);
  BinaryMask out(m.geometry());
  const std::uint32_t best = cc.largest();
  if (best == 0) return out;
  for (std::size_t n = 0; n < m.size(); ++n) out[n] = cc.labels[n] == best ? 1 : 0;
  return out;
}

}  // namespace negvol
