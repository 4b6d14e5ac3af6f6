// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "voxaug/errors.hpp"
#include "voxaug/rng.hpp"

namespace voxaug {

void PosedImageDataset::validate() const {
  cam.validate();
  if (frames.empty()) throw ValidationError("PosedImageDataset: no frames");
  for (size_t i = 0; i < frames.size(); ++i) {
    const Image& img = frames[i].image;
    if (img.width != cam.width || img.height != cam.height || img.channels != 3)
      throw ValidationError("PosedImageDataset: frame " + std::to_string(i) +
                            " does not match the camera dimensions");
  }
}

void TrainConfig::validate() const {
  if (iterations < 1) throw ValidationError("TrainConfig: iterations must be >= 1");
  if (rays_per_batch < 1) throw ValidationError("TrainConfig: rays_per_batch must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ValidationError("TrainConfig: betas must lie in [0, 1)");
  if (tv_weight < 0.0) throw ValidationError("TrainConfig: tv_weight must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw ValidationError("TrainConfig: holdout_fraction must lie in [0, 1)");
  if (checkpoint_every < 1) throw ValidationError("TrainConfig: checkpoint_every must be >= 1");
  render.validate();
}

namespace {

constexpr int kGradSlabs = 64;  // fixed partition of the node index space

struct SampleRec {
  Vec3 p;
  Vec3 c;
  double delta;
  double sigma;
  double alpha;
  double transmittance;  // T before this sample
};

// Emits the 8 trilinear-corner gradient entries of one cell, merging
// consecutive samples that land in the same cell before flushing.
struct CellEmitter {
  const VoxelField& field;
  PhotometricWorkspace::Entry* out;
  int count = 0;
  int cell_ix = -1, cell_iy = -1, cell_iz = -1;
  double acc_d[8] = {};
  Vec3 acc_rgb[8] = {};

  CellEmitter(const VoxelField& f, PhotometricWorkspace::Entry* o) : field(f), out(o) {}

  void flush() {
    if (cell_ix < 0) return;
    const size_t base = field.node_index(cell_ix, cell_iy, cell_iz);
    const size_t sy = static_cast<size_t>(field.nx);
    const size_t sz = sy * static_cast<size_t>(field.ny);
    const size_t offs[8] = {0, 1, sy, sy + 1, sz, sz + 1, sz + sy, sz + sy + 1};
    for (int k = 0; k < 8; ++k) {
      out[count].idx = static_cast<uint32_t>(base + offs[k]);
      out[count].gd = static_cast<float>(acc_d[k]);
      out[count].gr = static_cast<float>(acc_rgb[k].x);
      out[count].gg = static_cast<float>(acc_rgb[k].y);
      out[count].gb = static_cast<float>(acc_rgb[k].z);
      ++count;
      acc_d[k] = 0.0;
      acc_rgb[k] = Vec3{};
    }
    cell_ix = -1;
  }

  void add(const Vec3& p, double g_raw_density, const Vec3& g_raw_rgb) {
    const GridCoord g = grid_coord(field, p);
    if (g.ix != cell_ix || g.iy != cell_iy || g.iz != cell_iz) {
      flush();
      cell_ix = g.ix;
      cell_iy = g.iy;
      cell_iz = g.iz;
    }
    const double wx[2] = {1.0 - g.fx, g.fx};
    const double wy[2] = {1.0 - g.fy, g.fy};
    const double wz[2] = {1.0 - g.fz, g.fz};
    int k = 0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const double w = wz[dz] * wy[dy] * wx[dx];
          acc_d[k] += w * g_raw_density;
          acc_rgb[k] += g_raw_rgb * w;
          ++k;
        }
  }
};

// Forward-marches one ray, then backpropagates the squared-error residual
// through the compositing sum, the activations, and the trilinear weights.
//
// With w_i = T_i alpha_i and the suffix S_i = sum_{j>i} w_j c_j + T_N bg:
//   d rgb / d sigma_i = delta_i ((1 - alpha_i) T_i c_i - S_i)
// which stays finite as alpha_i -> 1. The activation slopes come from the
// activated values themselves: d sigma / d raw = logistic(raw) =
// 1 - exp(-sigma), and d c / d raw = c (1 - c).
double backprop_ray(const VoxelField& field, const Ray& ray, const Vec3& target,
                    const RenderConfig& cfg, double inv_ray_count,
                    std::vector<SampleRec>& samples, PhotometricWorkspace::Entry* out,
                    int* out_count) {
  samples.clear();
  auto recorder = [&samples](const Vec3& p, double delta, const FieldSample& s, double alpha,
                             double transmittance) {
    samples.push_back({p, s.rgb, delta, s.sigma, alpha, transmittance});
  };
  const RayShade shade = detail::march_ray(field, ray, cfg, 0, recorder);

  const Vec3 residual = shade.rgb - target;
  const double loss = dot(residual, residual);
  const Vec3 g = residual * (2.0 * inv_ray_count);

  double t_final = 1.0;
  if (!samples.empty()) {
    const SampleRec& last = samples.back();
    t_final = last.transmittance * (1.0 - last.alpha);
  }
  Vec3 suffix = cfg.background_rgb * t_final;

  CellEmitter emitter(field, out);
  for (size_t i = samples.size(); i-- > 0;) {
    const SampleRec& s = samples[i];
    const double w = s.transmittance * s.alpha;
    const Vec3 g_raw_rgb{g.x * w * s.c.x * (1.0 - s.c.x), g.y * w * s.c.y * (1.0 - s.c.y),
                         g.z * w * s.c.z * (1.0 - s.c.z)};
    const Vec3 drgb_dsigma =
        (s.c * ((1.0 - s.alpha) * s.transmittance) - suffix) * s.delta;
    const double g_raw_density = dot(g, drgb_dsigma) * (1.0 - std::exp(-s.sigma));
    emitter.add(s.p, g_raw_density, g_raw_rgb);
    suffix += s.c * w;
  }
  emitter.flush();
  *out_count = emitter.count;
  return loss;
}

double loss_and_grad_impl(const VoxelField& field, std::span<const Ray> rays,
                          std::span<const Vec3> targets, const RenderConfig& cfg,
                          GradGrids& grads, PhotometricWorkspace* ws, bool parallel) {
  if (rays.empty()) throw ValidationError("photometric_loss_and_grad: empty batch");
  if (rays.size() != targets.size())
    throw ValidationError("photometric_loss_and_grad: ray/target count mismatch");
  cfg.validate();

  const size_t nodes = field.node_count();
  grads.density.assign(nodes, 0.0);
  grads.rgb.assign(nodes * 3, 0.0);

  PhotometricWorkspace local;
  if (!ws) ws = &local;
  const int n_rays = static_cast<int>(rays.size());
  const size_t cap = static_cast<size_t>(cfg.samples_per_ray) * 8;
  ws->entries.resize(cap * static_cast<size_t>(n_rays));
  ws->counts.assign(static_cast<size_t>(n_rays), 0);
  ws->ray_loss.assign(static_cast<size_t>(n_rays), 0.0);
  const double inv_ray_count = 1.0 / n_rays;

  // Phase 1: per-ray forward + backward into private entry runs. Any thread
  // order works; each ray owns its slice.
#pragma omp parallel if (parallel)
  {
    std::vector<SampleRec> samples;
    samples.reserve(static_cast<size_t>(cfg.samples_per_ray));
#pragma omp for schedule(dynamic, 16)
    for (int r = 0; r < n_rays; ++r) {
      int count = 0;
      ws->ray_loss[static_cast<size_t>(r)] =
          backprop_ray(field, rays[static_cast<size_t>(r)], targets[static_cast<size_t>(r)],
                       cfg, inv_ray_count, samples, &ws->entries[cap * static_cast<size_t>(r)],
                       &count);
      ws->counts[static_cast<size_t>(r)] = count;
    }
  }

  // kGradSlabs fixed ranges of the node index space; the partition depends
  // only on the grid, so the reduction order is thread-count independent.
  const size_t slab_size = (nodes + kGradSlabs - 1) / kGradSlabs;

  if (!parallel) {
    // Reference reduction: direct scatter in (ray, emission) order.
    for (int r = 0; r < n_rays; ++r) {
      const PhotometricWorkspace::Entry* e = &ws->entries[cap * static_cast<size_t>(r)];
      for (int k = 0; k < ws->counts[static_cast<size_t>(r)]; ++k) {
        grads.density[e[k].idx] += e[k].gd;
        grads.rgb[e[k].idx * 3 + 0] += e[k].gr;
        grads.rgb[e[k].idx * 3 + 1] += e[k].gg;
        grads.rgb[e[k].idx * 3 + 2] += e[k].gb;
      }
    }
  } else {
    // Phase 2: count entries per (slab, ray).
    ws->slab_counts.assign(static_cast<size_t>(n_rays) * kGradSlabs, 0);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n_rays; ++r) {
      const PhotometricWorkspace::Entry* e = &ws->entries[cap * static_cast<size_t>(r)];
      int* sc = &ws->slab_counts[static_cast<size_t>(r) * kGradSlabs];
      for (int k = 0; k < ws->counts[static_cast<size_t>(r)]; ++k)
        ++sc[e[k].idx / slab_size];
    }

    // Phase 3: serial prefix sum in (slab, ray) order fixes every entry's
    // destination, preserving ray order within each slab.
    ws->cursors.assign(static_cast<size_t>(kGradSlabs) * n_rays + kGradSlabs + 1, 0);
    size_t* slab_begin = &ws->cursors[static_cast<size_t>(kGradSlabs) * n_rays];
    size_t total = 0;
    for (int s = 0; s < kGradSlabs; ++s) {
      slab_begin[s] = total;
      for (int r = 0; r < n_rays; ++r) {
        ws->cursors[static_cast<size_t>(s) * n_rays + r] = total;
        total += static_cast<size_t>(ws->slab_counts[static_cast<size_t>(r) * kGradSlabs + s]);
      }
    }
    slab_begin[kGradSlabs] = total;

    // Phase 4: scatter-copy into slab-sorted order; each (slab, ray) span is
    // written by exactly one ray.
    ws->sorted.resize(total);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n_rays; ++r) {
      const PhotometricWorkspace::Entry* e = &ws->entries[cap * static_cast<size_t>(r)];
      for (int k = 0; k < ws->counts[static_cast<size_t>(r)]; ++k) {
        const size_t s = e[k].idx / slab_size;
        ws->sorted[ws->cursors[s * n_rays + r]++] = e[k];
      }
    }

    // Phase 5: accumulate per slab; slabs are disjoint, order within a slab
    // is (ray, emission).
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < kGradSlabs; ++s) {
      for (size_t i = slab_begin[s]; i < slab_begin[s + 1]; ++i) {
        const PhotometricWorkspace::Entry& e = ws->sorted[i];
        grads.density[e.idx] += e.gd;
        grads.rgb[e.idx * 3 + 0] += e.gr;
        grads.rgb[e.idx * 3 + 1] += e.gg;
        grads.rgb[e.idx * 3 + 2] += e.gb;
      }
    }
  }

  double loss = 0.0;
  for (int r = 0; r < n_rays; ++r) loss += ws->ray_loss[static_cast<size_t>(r)];
  return loss * inv_ray_count;
}

}  // namespace

double photometric_loss_and_grad(const VoxelField& field, std::span<const Ray> rays,
                                 std::span<const Vec3> targets, const RenderConfig& cfg,
                                 GradGrids& grads, PhotometricWorkspace* ws) {
  return loss_and_grad_impl(field, rays, targets, cfg, grads, ws, true);
}

double photometric_loss_and_grad_serial(const VoxelField& field, std::span<const Ray> rays,
                                        std::span<const Vec3> targets, const RenderConfig& cfg,
                                        GradGrids& grads, PhotometricWorkspace* ws) {
  return loss_and_grad_impl(field, rays, targets, cfg, grads, ws, false);
}

double tv_penalty_and_grad(const VoxelField& field, double weight,
                           std::span<double> grad_density) {
  if (weight < 0.0) throw ValidationError("tv_penalty_and_grad: negative weight");
  if (grad_density.size() != field.node_count())
    throw ValidationError("tv_penalty_and_grad: gradient buffer size mismatch");
  if (weight == 0.0) return 0.0;

  const int nx = field.nx, ny = field.ny, nz = field.nz;
  const float* d = field.raw_density.data();
  double penalty = 0.0;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const size_t i = field.node_index(x, y, z);
        if (x + 1 < nx) {
          const double diff = static_cast<double>(d[i + 1]) - d[i];
          penalty += diff * diff;
        }
        if (y + 1 < ny) {
          const double diff = static_cast<double>(d[i + nx]) - d[i];
          penalty += diff * diff;
        }
        if (z + 1 < nz) {
          const double diff = static_cast<double>(d[i + static_cast<size_t>(nx) * ny]) - d[i];
          penalty += diff * diff;
        }
      }

  const double two_w = 2.0 * weight;
#pragma omp parallel for schedule(static)
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const size_t i = field.node_index(x, y, z);
        const double di = d[i];
        double acc = 0.0;
        if (x > 0) acc += di - d[i - 1];
        if (x + 1 < nx) acc += di - d[i + 1];
        if (y > 0) acc += di - d[i - nx];
        if (y + 1 < ny) acc += di - d[i + nx];
        if (z > 0) acc += di - d[i - static_cast<size_t>(nx) * ny];
        if (z + 1 < nz) acc += di - d[i + static_cast<size_t>(nx) * ny];
        grad_density[i] += two_w * acc;
      }

  return weight * penalty;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw ValidationError("adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  const int64_t n = static_cast<int64_t>(params.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const double g = grads[static_cast<size_t>(i)];
    double& m = state.m[static_cast<size_t>(i)];
    double& v = state.v[static_cast<size_t>(i)];
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[static_cast<size_t>(i)] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

namespace {

double holdout_psnr(const VoxelField& field, const PosedImageDataset& dataset,
                    std::span<const int> holdout, const RenderConfig& rcfg) {
  if (holdout.empty()) return std::numeric_limits<double>::quiet_NaN();
  double se = 0.0;
  size_t n = 0;
  for (const int idx : holdout) {
    const auto& frame = dataset.frames[static_cast<size_t>(idx)];
    const RenderOutput out = render_image(field, dataset.cam, frame.camera_to_world, rcfg);
    for (size_t i = 0; i < out.rgb.data.size(); ++i) {
      const double diff = static_cast<double>(out.rgb.data[i]) - frame.image.data[i];
      se += diff * diff;
    }
    n += out.rgb.data.size();
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(se / static_cast<double>(n));
}

}  // namespace

void holdout_split(int n_frames, double fraction, uint64_t seed, std::vector<int>* train_indices,
                   std::vector<int>* holdout_indices) {
  if (n_frames < 1) throw ValidationError("holdout_split: n_frames must be >= 1");
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw ValidationError("holdout_split: fraction must lie in [0, 1)");
  std::vector<int> order(static_cast<size_t>(n_frames));
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle_rng(mix_key(seed, 0x686f6c64ULL));  // "hold"
  for (int i = n_frames - 1; i > 0; --i) {
    const int j = static_cast<int>(shuffle_rng.next_u64() % static_cast<uint64_t>(i + 1));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  int n_holdout = static_cast<int>(std::floor(fraction * n_frames));
  if (fraction > 0.0 && n_holdout == 0) n_holdout = 1;
  if (n_holdout >= n_frames) n_holdout = n_frames - 1;
  holdout_indices->assign(order.begin(), order.begin() + n_holdout);
  train_indices->assign(order.begin() + n_holdout, order.end());
  std::sort(holdout_indices->begin(), holdout_indices->end());
  std::sort(train_indices->begin(), train_indices->end());
}

TrainResult train_field(const PosedImageDataset& dataset, const Vec3& bbox_min,
                        const Vec3& bbox_max, int nx, int ny, int nz, const TrainConfig& cfg) {
  dataset.validate();
  cfg.validate();
  if (cfg.holdout_fraction > 0.0 && dataset.frames.size() < 2)
    throw ValidationError("train_field: holdout requires at least 2 frames");

  TrainResult result;
  result.field = VoxelField::create(nx, ny, nz, bbox_min, bbox_max);

  const int n_frames = static_cast<int>(dataset.frames.size());
  holdout_split(n_frames, cfg.holdout_fraction, cfg.seed, &result.report.train_indices,
                &result.report.holdout_indices);

  const auto& train_idx = result.report.train_indices;
  const int n_train = static_cast<int>(train_idx.size());
  const size_t nodes = result.field.node_count();

  // Double-precision master copies drive the optimizer; the float grids the
  // renderer reads are synced from them every step.
  std::vector<double> master_density(nodes, -2.0);
  std::vector<double> master_rgb(nodes * 3, 0.0);
  AdamState density_state(nodes);
  AdamState rgb_state(nodes * 3);
  GradGrids grads;
  PhotometricWorkspace ws;
  std::vector<Ray> rays(static_cast<size_t>(cfg.rays_per_batch));
  std::vector<Vec3> targets(static_cast<size_t>(cfg.rays_per_batch));

  const auto t_start = std::chrono::steady_clock::now();
  for (int it = 1; it <= cfg.iterations; ++it) {
    // Counter-based ray sampling: uniform over (train frame, pixel) pairs.
    for (int r = 0; r < cfg.rays_per_batch; ++r) {
      RngStream rng(mix_key(cfg.seed, 0x72617973ULL, static_cast<uint64_t>(it),
                            static_cast<uint64_t>(r)));  // "rays"
      const int f = train_idx[static_cast<size_t>(rng.next_u64() % static_cast<uint64_t>(n_train))];
      const uint64_t pix = rng.next_u64() % (static_cast<uint64_t>(dataset.cam.width) *
                                             static_cast<uint64_t>(dataset.cam.height));
      const int x = static_cast<int>(pix % static_cast<uint64_t>(dataset.cam.width));
      const int y = static_cast<int>(pix / static_cast<uint64_t>(dataset.cam.width));
      const auto& frame = dataset.frames[static_cast<size_t>(f)];
      rays[static_cast<size_t>(r)] = generate_ray(dataset.cam, frame.camera_to_world, x, y);
      targets[static_cast<size_t>(r)] = frame.image.rgb_at(x, y);
    }

    const double photo =
        photometric_loss_and_grad(result.field, rays, targets, cfg.render, grads, &ws);
    const double tv = tv_penalty_and_grad(result.field, cfg.tv_weight, grads.density);

    adam_step(master_density, grads.density, density_state, cfg.learning_rate, cfg.adam_beta1,
              cfg.adam_beta2, cfg.adam_eps);
    adam_step(master_rgb, grads.rgb, rgb_state, cfg.learning_rate, cfg.adam_beta1,
              cfg.adam_beta2, cfg.adam_eps);

    const int64_t total = static_cast<int64_t>(nodes);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < total; ++i) {
      result.field.raw_density[static_cast<size_t>(i)] =
          static_cast<float>(master_density[static_cast<size_t>(i)]);
      result.field.raw_rgb[static_cast<size_t>(i) * 3 + 0] =
          static_cast<float>(master_rgb[static_cast<size_t>(i) * 3 + 0]);
      result.field.raw_rgb[static_cast<size_t>(i) * 3 + 1] =
          static_cast<float>(master_rgb[static_cast<size_t>(i) * 3 + 1]);
      result.field.raw_rgb[static_cast<size_t>(i) * 3 + 2] =
          static_cast<float>(master_rgb[static_cast<size_t>(i) * 3 + 2]);
    }

    if (it == 1 || it % cfg.checkpoint_every == 0 || it == cfg.iterations) {
      TrainCheckpoint cp;
      cp.iteration = it;
      cp.loss = photo + tv;
      cp.holdout_psnr_db =
          holdout_psnr(result.field, dataset, result.report.holdout_indices, cfg.render);
      cp.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      result.report.checkpoints.push_back(cp);
    }
  }

  return result;
}

void write_train_report_jsonl(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_train_report_jsonl: cannot open '" + path + "'");
  out.precision(17);
  for (const auto& cp : report.checkpoints) {
    out << "{\"iteration\": " << cp.iteration << ", \"loss\": " << cp.loss
        << ", \"holdout_psnr_db\": ";
    if (std::isnan(cp.holdout_psnr_db))
      out << "null";
    else
      out << cp.holdout_psnr_db;
    out << ", \"wall_seconds\": " << cp.wall_seconds << "}\n";
  }
  if (!out) throw IoError("write_train_report_jsonl: short write to '" + path + "'");
}

}  // namespace voxaug
