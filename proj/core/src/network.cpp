#include "lkcell/network.hpp"

#include <string>

#include "lkcell/activations.hpp"
#include "lkcell/model_store.hpp"
#include "lkcell/resample.hpp"

namespace lkcell {

void NetworkConfig::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (stage_depths[i] < 1) {
      throw ConfigError("network config: stage " + std::to_string(i + 1) +
                        " depth must be >= 1");
    }
    if (stage_channels[i] < 1) {
      throw ConfigError("network config: stage " + std::to_string(i + 1) +
                        " width must be >= 1");
    }
  }
  if (stage_channels[0] % 2 != 0) {
    throw ConfigError("network config: stem emits C1/2 channels, so C1 must be "
                      "even (layer stem, C1=" + std::to_string(stage_channels[0]) + ")");
  }
  if (num_classes < 2) {
    throw ConfigError("network config: num_classes must be >= 2");
  }
  for (int i = 0; i < 4; ++i) {
    LKBlockConfig bc;
    bc.channels = stage_channels[i];
    bc.large_kernel = stage_kernels[i];
    bc.branches = branches;
    bc.validate();  // odd kernels + per-branch extent constraint
  }
}

NetworkConfig NetworkConfig::named(const std::string& name) {
  NetworkConfig cfg;
  cfg.name = name;
  if (name == "toy") {
    cfg.stage_depths = {1, 1, 1, 1};
    cfg.stage_channels = {8, 16, 32, 64};
  } else if (name == "lkcell-b") {
    cfg.stage_depths = {2, 2, 8, 2};
    cfg.stage_channels = {64, 128, 256, 512};
  } else if (name == "lkcell-l") {
    cfg.stage_depths = {3, 3, 27, 3};
    cfg.stage_channels = {64, 128, 256, 512};
  } else {
    throw ConfigError("unknown network config '" + name +
                      "' (expected toy, lkcell-b, or lkcell-l)");
  }
  return cfg;
}

bool NetworkConfig::structurally_equal(const NetworkConfig& o) const {
  return stage_depths == o.stage_depths && stage_channels == o.stage_channels &&
         num_classes == o.num_classes && stage_kernels == o.stage_kernels &&
         branches == o.branches;
}

namespace {

ConvParams make_conv(int in_c, int out_c, int k, int stride, int dilation, int groups,
                     bool with_bias) {
  ConvParams p;
  p.in_channels = in_c;
  p.out_channels = out_c;
  p.kernel_h = k;
  p.kernel_w = k;
  p.stride = stride;
  p.dilation = dilation;
  p.padding = dilation * (k - 1) / 2;
  p.groups = groups;
  p.weights.assign(p.weight_count(), 0.0f);
  if (with_bias) p.bias.assign(out_c, 0.0f);
  return p;
}

BatchNormParams make_bn(int channels) {
  BatchNormParams bn;
  bn.gamma.assign(channels, 1.0f);
  bn.beta.assign(channels, 0.0f);
  bn.running_mean.assign(channels, 0.0f);
  bn.running_var.assign(channels, 1.0f);
  return bn;
}

LKBlock make_block(int channels, int kernel,
                   const std::vector<std::pair<int, int>>& branches) {
  LKBlock b;
  b.config.channels = channels;
  b.config.large_kernel = kernel;
  b.config.branches = branches;
  b.config.pre_pointwise = true;
  b.config.post_pointwise = true;
  b.large_conv = make_conv(channels, channels, kernel, 1, 1, channels, false);
  b.large_bn = make_bn(channels);
  for (const auto& [k, r] : branches) {
    DilatedBranch br;
    br.kernel_size = k;
    br.dilation = r;
    br.conv = make_conv(channels, channels, k, 1, r, channels, false);
    br.bn = make_bn(channels);
    b.branches.push_back(std::move(br));
  }
  b.entry_conv = make_conv(channels, channels, 1, 1, 1, 1, false);
  b.entry_bn = make_bn(channels);
  b.exit_conv = make_conv(channels, channels, 1, 1, 1, 1, true);
  return b;
}

// Skip widths in decoder consumption order: stage3, stage2, stage1, stem.
std::array<int, 4> decoder_skip_widths(const NetworkConfig& cfg) {
  return {cfg.stage_channels[2], cfg.stage_channels[1], cfg.stage_channels[0],
          cfg.stage_channels[0] / 2};
}

Tensor conv_bn_gelu(const Tensor& x, const ConvBnLayer& layer) {
  return gelu(batchnorm_inference(conv2d(x, layer.conv), layer.bn));
}

}  // namespace

Tensor block_forward(const BlockVariant& block, const Tensor& x) {
  if (std::holds_alternative<LKBlock>(block)) {
    return forward_multibranch(std::get<LKBlock>(block), x);
  }
  return forward_fused(std::get<FusedBlock>(block), x);
}

Network build_network_structure(const NetworkConfig& config) {
  config.validate();
  Network net;
  net.config = config;

  const auto& C = config.stage_channels;
  const int stem_c = C[0] / 2;
  net.stem.conv = make_conv(3, stem_c, 3, 2, 1, 1, false);
  net.stem.bn = make_bn(stem_c);

  int in_c = stem_c;
  for (int s = 0; s < 4; ++s) {
    net.stages[s].down.conv = make_conv(in_c, C[s], 3, 2, 1, 1, false);
    net.stages[s].down.bn = make_bn(C[s]);
    for (int b = 0; b < config.stage_depths[s]; ++b) {
      net.stages[s].blocks.emplace_back(
          make_block(C[s], config.stage_kernels[s], config.branches));
    }
    in_c = C[s];
  }

  // Structural contract: the encoder emits 5 skips (stem + 4 stages); the
  // bottleneck feeds the decoder and the remaining 4 skips are consumed one
  // per decoder stage, finest last.
  const auto skip_w = decoder_skip_widths(config);
  int dec_in = C[3];
  for (int i = 0; i < 4; ++i) {
    net.decoder[i].block = make_block(dec_in, config.stage_kernels[3 - i],
                                      config.branches);
    net.decoder[i].proj = make_conv(dec_in + skip_w[i], skip_w[i], 1, 1, 1, 1, true);
    dec_in = skip_w[i];
  }
  if (dec_in != stem_c) {
    throw ConfigError("network config: decoder chain ends at width " +
                      std::to_string(dec_in) + " but the full-resolution fusion "
                      "expects " + std::to_string(stem_c) + " (layer dec4.proj)");
  }

  net.input_skip1 = make_conv(3, stem_c, 3, 1, 1, 1, true);
  net.input_skip2 = make_conv(stem_c, stem_c, 3, 1, 1, 1, true);

  net.heads.np = make_conv(stem_c, 2, 3, 1, 1, 1, true);
  net.heads.hv = make_conv(stem_c, 2, 3, 1, 1, 1, true);
  net.heads.nt = make_conv(stem_c, config.num_classes + 1, 3, 1, 1, 1, true);
  return net;
}

Network build_network(const NetworkConfig& config, std::uint64_t seed) {
  Network net = build_network_structure(config);
  seeded_init(net, seed);
  return net;
}

std::array<Tensor, 5> encoder_forward(const Network& net, const Tensor& image) {
  if (image.channels != 3) {
    throw ShapeError("encoder_forward: expected a 3-channel image, got " +
                     image.shape_str());
  }
  if (image.height % 32 != 0 || image.width % 32 != 0) {
    throw ShapeError("encoder_forward: H and W must be divisible by 32, got " +
                     image.shape_str() + "; pad the input (e.g. reflectively) "
                     "and crop the outputs back");
  }
  require_finite(image, "encoder_forward");

  std::array<Tensor, 5> skips;
  Tensor x = conv_bn_gelu(image, net.stem);
  skips[0] = x;
  for (int s = 0; s < 4; ++s) {
    x = conv_bn_gelu(x, net.stages[s].down);
    for (const auto& block : net.stages[s].blocks) {
      x = block_forward(block, x);
    }
    skips[s + 1] = x;
  }
  return skips;
}

Tensor decoder_stage_forward(const DecoderStage& stage, const Tensor& f_prev,
                             const Tensor& z) {
  if (z.height != 2 * f_prev.height || z.width != 2 * f_prev.width ||
      z.batch != f_prev.batch) {
    throw ShapeError("decoder_stage: skip " + z.shape_str() +
                     " must be 2x the spatial dims of " + f_prev.shape_str());
  }
  Tensor f = block_forward(stage.block, f_prev);
  f = upsample_bilinear(f, 2);
  return conv2d(concat_channels(f, z), stage.proj);
}

SegmentationOutput forward(const Network& net, const Tensor& image) {
  const auto skips = encoder_forward(net, image);

  Tensor f = skips[4];
  for (int i = 0; i < 4; ++i) {
    f = decoder_stage_forward(net.decoder[i], f, skips[3 - i]);
  }
  f = upsample_bilinear(f, 2);

  Tensor skip = conv2d(gelu(conv2d(image, net.input_skip1)), net.input_skip2);
  f = add(f, skip);

  SegmentationOutput out;
  out.np_map = softmax_channels(conv2d(f, net.heads.np));
  out.hv_map = tanh_map(conv2d(f, net.heads.hv));
  out.nt_map = softmax_channels(conv2d(f, net.heads.nt));
  return out;
}

Network reparameterize_network(const Network& net) {
  Network fused = net;
  fused.fused = true;
  auto fuse = [](BlockVariant& v) {
    if (std::holds_alternative<LKBlock>(v)) {
      v = reparameterize(std::get<LKBlock>(v));
    }
  };
  for (auto& stage : fused.stages) {
    for (auto& b : stage.blocks) fuse(b);
  }
  for (auto& d : fused.decoder) fuse(d.block);
  return fused;
}

namespace {

using VisitFn = std::function<void(const ParamRef&)>;

void emit(const VisitFn& fn, const std::string& name, std::vector<int> dims,
          std::vector<float>& v, bool is_buffer = false) {
  fn(ParamRef{name, std::move(dims), v.data(), v.size(), is_buffer});
}

void visit_conv(const VisitFn& fn, const std::string& prefix, ConvParams& p) {
  emit(fn, prefix + ".weight",
       {p.out_channels, p.in_channels / p.groups, p.kernel_h, p.kernel_w}, p.weights);
  if (!p.bias.empty()) emit(fn, prefix + ".bias", {p.out_channels}, p.bias);
}

void visit_bn(const VisitFn& fn, const std::string& prefix, BatchNormParams& bn) {
  const int c = bn.channels();
  emit(fn, prefix + ".gamma", {c}, bn.gamma);
  emit(fn, prefix + ".beta", {c}, bn.beta);
  emit(fn, prefix + ".mean", {c}, bn.running_mean, true);
  emit(fn, prefix + ".var", {c}, bn.running_var, true);
}

void visit_block(const VisitFn& fn, const std::string& prefix, BlockVariant& v) {
  if (std::holds_alternative<LKBlock>(v)) {
    LKBlock& b = std::get<LKBlock>(v);
    if (b.config.pre_pointwise) {
      visit_conv(fn, prefix + ".entry.conv", b.entry_conv);
      visit_bn(fn, prefix + ".entry.bn", b.entry_bn);
    }
    visit_conv(fn, prefix + ".large.conv", b.large_conv);
    visit_bn(fn, prefix + ".large.bn", b.large_bn);
    for (std::size_t i = 0; i < b.branches.size(); ++i) {
      const std::string bp = prefix + ".branch" + std::to_string(i);
      visit_conv(fn, bp + ".conv", b.branches[i].conv);
      visit_bn(fn, bp + ".bn", b.branches[i].bn);
    }
    if (b.config.post_pointwise) visit_conv(fn, prefix + ".exit.conv", b.exit_conv);
  } else {
    FusedBlock& b = std::get<FusedBlock>(v);
    if (b.config.pre_pointwise) {
      visit_conv(fn, prefix + ".entry.conv", b.entry_conv);
      visit_bn(fn, prefix + ".entry.bn", b.entry_bn);
    }
    visit_conv(fn, prefix + ".fused.conv", b.fused_conv);
    if (b.config.post_pointwise) visit_conv(fn, prefix + ".exit.conv", b.exit_conv);
  }
}

}  // namespace

void visit_params(Network& net, const VisitFn& fn) {
  visit_conv(fn, "stem.conv", net.stem.conv);
  visit_bn(fn, "stem.bn", net.stem.bn);
  for (int s = 0; s < 4; ++s) {
    const std::string sp = "enc" + std::to_string(s + 1);
    visit_conv(fn, sp + ".down.conv", net.stages[s].down.conv);
    visit_bn(fn, sp + ".down.bn", net.stages[s].down.bn);
    for (std::size_t b = 0; b < net.stages[s].blocks.size(); ++b) {
      visit_block(fn, sp + ".block" + std::to_string(b), net.stages[s].blocks[b]);
    }
  }
  for (int i = 0; i < 4; ++i) {
    const std::string dp = "dec" + std::to_string(i + 1);
    visit_block(fn, dp + ".block", net.decoder[i].block);
    visit_conv(fn, dp + ".proj", net.decoder[i].proj);
  }
  visit_conv(fn, "inskip.conv1", net.input_skip1);
  visit_conv(fn, "inskip.conv2", net.input_skip2);
  visit_conv(fn, "head.np", net.heads.np);
  visit_conv(fn, "head.hv", net.heads.hv);
  visit_conv(fn, "head.nt", net.heads.nt);
}

void visit_params(const Network& net,
                  const std::function<void(const std::string&, const std::vector<int>&,
                                           const float*, std::size_t, bool)>& fn) {
  visit_params(const_cast<Network&>(net), [&](const ParamRef& p) {
    fn(p.name, p.dims, p.data, p.size, p.is_buffer);
  });
}

std::uint64_t count_params(const Network& net) {
  std::uint64_t total = 0;
  visit_params(net, [&](const std::string&, const std::vector<int>&, const float*,
                        std::size_t size, bool is_buffer) {
    if (!is_buffer) total += size;
  });
  return total;
}

}  // namespace lkcell
