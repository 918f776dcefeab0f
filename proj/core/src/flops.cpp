#include "lkcell/flops.hpp"

namespace lkcell {

namespace {

using u64 = std::uint64_t;

struct CostWalker {
  std::vector<LayerCost> layers;

  u64 elems(int c, int h, int w) const {
    return static_cast<u64>(c) * h * w;
  }

  // conv + optional BN (2/elem) + optional activation (1/elem)
  void conv(const std::string& name, int in_c, int out_c, int k, int groups,
            int out_h, int out_w, bool bias, bool bn, bool act) {
    LayerCost lc;
    lc.name = name;
    const u64 out_elems = elems(out_c, out_h, out_w);
    lc.params = static_cast<u64>(out_c) * (in_c / groups) * k * k;
    lc.flops = 2 * conv_macs(out_c, in_c / groups, k, k, out_h, out_w);
    if (bias) {
      lc.params += out_c;
      lc.flops += out_elems;
    }
    if (bn) {
      lc.params += 2ULL * out_c;  // gamma + beta
      lc.flops += 2 * out_elems;
    }
    if (act) lc.flops += out_elems;
    layers.push_back(lc);
  }

  void pointwise(const std::string& name, int c, int h, int w, u64 flops_per_elem) {
    layers.push_back({name, 0, flops_per_elem * elems(c, h, w)});
  }
};

// Depthwise core of one block: large kernel + branches (multi-branch) or the
// single fused K x K kernel; then ReLU; entry/exit pointwise convs around it.
void block_cost(CostWalker& cw, const std::string& prefix, int channels, int K,
                const std::vector<std::pair<int, int>>& branches, int h, int w,
                bool fused) {
  cw.conv(prefix + ".entry", channels, channels, 1, 1, h, w, false, true, true);
  if (fused) {
    cw.conv(prefix + ".fused_dw", channels, channels, K, channels, h, w, true,
            false, false);
  } else {
    cw.conv(prefix + ".large_dw", channels, channels, K, channels, h, w, false,
            true, false);
    for (std::size_t i = 0; i < branches.size(); ++i) {
      cw.conv(prefix + ".branch" + std::to_string(i) + "_dw", channels, channels,
              branches[i].first, channels, h, w, false, true, false);
      cw.pointwise(prefix + ".branch" + std::to_string(i) + "_add", channels, h, w, 1);
    }
  }
  cw.pointwise(prefix + ".relu", channels, h, w, 1);
  cw.conv(prefix + ".exit", channels, channels, 1, 1, h, w, true, false, false);
}

}  // namespace

u64 conv_macs(int out_c, int in_c_per_group, int kh, int kw, int out_h, int out_w,
              int batch) {
  return static_cast<u64>(batch) * out_c * in_c_per_group * kh * kw * out_h * out_w;
}

CostReport network_cost(const NetworkConfig& config, int height, int width,
                        bool fused) {
  config.validate();
  if (height % 32 != 0 || width % 32 != 0 || height < 32 || width < 32) {
    throw ShapeError("network_cost: H and W must be positive multiples of 32");
  }

  CostWalker cw;
  const auto& C = config.stage_channels;
  const int stem_c = C[0] / 2;

  int h = height / 2, w = width / 2;
  cw.conv("stem", 3, stem_c, 3, 1, h, w, false, true, true);

  int in_c = stem_c;
  for (int s = 0; s < 4; ++s) {
    h /= 2;
    w /= 2;
    cw.conv("enc" + std::to_string(s + 1) + ".down", in_c, C[s], 3, 1, h, w, false,
            true, true);
    for (int b = 0; b < config.stage_depths[s]; ++b) {
      block_cost(cw, "enc" + std::to_string(s + 1) + ".block" + std::to_string(b),
                 C[s], config.stage_kernels[s], config.branches, h, w, fused);
    }
    in_c = C[s];
  }

  const std::array<int, 4> skip_w{C[2], C[1], C[0], stem_c};
  int dec_in = C[3];
  for (int i = 0; i < 4; ++i) {
    const std::string dp = "dec" + std::to_string(i + 1);
    block_cost(cw, dp + ".block", dec_in, config.stage_kernels[3 - i],
               config.branches, h, w, fused);
    h *= 2;
    w *= 2;
    cw.pointwise(dp + ".upsample", dec_in, h, w, 8);
    cw.conv(dp + ".proj", dec_in + skip_w[i], skip_w[i], 1, 1, h, w, true, false,
            false);
    dec_in = skip_w[i];
  }

  h *= 2;
  w *= 2;
  cw.pointwise("final.upsample", stem_c, h, w, 8);
  cw.conv("inskip.conv1", 3, stem_c, 3, 1, h, w, true, false, true);
  cw.conv("inskip.conv2", stem_c, stem_c, 3, 1, h, w, true, false, false);
  cw.pointwise("final.add", stem_c, h, w, 1);

  cw.conv("head.np", stem_c, 2, 3, 1, h, w, true, false, false);
  cw.pointwise("head.np.softmax", 2, h, w, 3);
  cw.conv("head.hv", stem_c, 2, 3, 1, h, w, true, false, false);
  cw.pointwise("head.hv.tanh", 2, h, w, 1);
  cw.conv("head.nt", stem_c, config.num_classes + 1, 3, 1, h, w, true, false, false);
  cw.pointwise("head.nt.softmax", config.num_classes + 1, h, w, 3);

  CostReport report;
  report.layers = std::move(cw.layers);
  for (const auto& l : report.layers) {
    report.total_params += l.params;
    report.total_flops += l.flops;
  }
  return report;
}

u64 count_params(const NetworkConfig& config, bool fused) {
  // Spatial size does not affect parameter counts.
  return network_cost(config, 32, 32, fused).total_params;
}

u64 count_flops(const NetworkConfig& config, int height, int width, bool fused) {
  return network_cost(config, height, width, fused).total_flops;
}

}  // namespace lkcell
