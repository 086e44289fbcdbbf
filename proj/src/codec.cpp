#include "jscc/codec.hpp"

#include <sstream>
#include <stdexcept>

namespace jscc {
namespace codec {

namespace {

const char* act_name(Activation a) {
  switch (a) {
    case Activation::prelu:
      return "prelu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::none:
      return "none";
  }
  return "none";
}

Activation act_from(const std::string& s) {
  if (s == "prelu") return Activation::prelu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "none") return Activation::none;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

}  // namespace

std::vector<FlLayerSpec> ArchSpec::encoder_layers() const {
  std::vector<FlLayerSpec> out;
  for (const auto& l : fl_layers) {
    if (!l.up) out.push_back(l);
  }
  return out;
}

std::vector<FlLayerSpec> ArchSpec::decoder_layers() const {
  std::vector<FlLayerSpec> out;
  for (const auto& l : fl_layers) {
    if (l.up) out.push_back(l);
  }
  return out;
}

int ArchSpec::encoder_stride_product() const {
  int p = 1;
  for (const auto& l : fl_layers) {
    if (!l.up) p *= l.stride;
  }
  return p;
}

void ArchSpec::validate() const {
  if (fl_layers.empty()) throw std::invalid_argument("architecture has no layers");
  if (input_channels < 1 || output_channels < 1) {
    throw std::invalid_argument("channel counts must be positive");
  }
  if (af_hidden_width < 0) throw std::invalid_argument("af_hidden_width must be >= 0");
  bool seen_up = false;
  int down_stride = 1, up_stride = 1, n_down = 0, n_up = 0, n_sigmoid = 0;
  for (const auto& l : fl_layers) {
    if (l.kernel < 1 || l.stride < 1 || l.filters < 1) {
      throw std::invalid_argument("bad layer descriptor");
    }
    if (l.up) {
      seen_up = true;
      up_stride *= l.stride;
      ++n_up;
    } else {
      if (seen_up) throw std::invalid_argument("encoder layers must precede decoder layers");
      down_stride *= l.stride;
      ++n_down;
    }
    if (l.act == Activation::sigmoid) ++n_sigmoid;
  }
  if (n_down == 0 || n_up == 0) {
    throw std::invalid_argument("architecture needs at least one down and one up layer");
  }
  if (down_stride != up_stride) {
    throw std::invalid_argument("encoder stride product " + std::to_string(down_stride) +
                                " does not match decoder stride product " +
                                std::to_string(up_stride));
  }
  if (n_sigmoid != 1 || fl_layers.back().act != Activation::sigmoid ||
      !fl_layers.back().up) {
    throw std::invalid_argument(
        "exactly one sigmoid activation is allowed and it must sit on the final decoder "
        "layer");
  }
  const auto enc = encoder_layers();
  if (enc.back().filters != output_channels) {
    throw std::invalid_argument("last encoder layer must carry output_channels filters");
  }
  const auto dec = decoder_layers();
  if (dec.back().filters != input_channels) {
    throw std::invalid_argument("last decoder layer must restore the image channels");
  }
}

std::string ArchSpec::serialize() const {
  std::ostringstream os;
  os << "arch v1\n";
  os << "input_channels " << input_channels << "\n";
  os << "output_channels " << output_channels << "\n";
  os << "use_attention " << (use_attention ? 1 : 0) << "\n";
  os << "af_hidden_width " << af_hidden_width << "\n";
  for (const auto& l : fl_layers) {
    os << "fl " << (l.up ? "up" : "down") << " " << l.kernel << " " << l.filters << " "
       << l.stride << " " << act_name(l.act) << "\n";
  }
  return os.str();
}

ArchSpec ArchSpec::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  ArchSpec spec;
  spec.fl_layers.clear();
  if (!std::getline(is, line) || line != "arch v1") {
    throw std::invalid_argument("unsupported architecture description");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "input_channels") {
      ls >> spec.input_channels;
    } else if (key == "output_channels") {
      ls >> spec.output_channels;
    } else if (key == "use_attention") {
      int v = 0;
      ls >> v;
      spec.use_attention = v != 0;
    } else if (key == "af_hidden_width") {
      ls >> spec.af_hidden_width;
    } else if (key == "fl") {
      FlLayerSpec l;
      std::string dir, act;
      ls >> dir >> l.kernel >> l.filters >> l.stride >> act;
      if (dir != "up" && dir != "down") {
        throw std::invalid_argument("bad layer direction '" + dir + "'");
      }
      l.up = dir == "up";
      l.act = act_from(act);
      spec.fl_layers.push_back(l);
    } else {
      throw std::invalid_argument("unknown architecture key '" + key + "'");
    }
    if (ls.fail()) throw std::invalid_argument("malformed architecture line: " + line);
  }
  spec.validate();
  return spec;
}

ArchSpec make_preset(const std::string& name, int output_channels) {
  int width = 0;
  int af_hidden = 0;
  if (name == "paper-cifar") {
    width = 256;
    af_hidden = 16;
  } else if (name == "tiny") {
    width = 32;
    af_hidden = 0;
  } else {
    throw std::invalid_argument("unknown architecture preset '" + name + "'");
  }
  ArchSpec spec;
  spec.input_channels = 3;
  spec.output_channels = output_channels;
  spec.af_hidden_width = af_hidden;
  spec.fl_layers = {
      {9, width, 2, false, Activation::prelu},
      {5, width, 2, false, Activation::prelu},
      {5, width, 1, false, Activation::prelu},
      {5, width, 1, false, Activation::prelu},
      {5, output_channels, 1, false, Activation::none},
      {5, width, 1, true, Activation::prelu},
      {5, width, 1, true, Activation::prelu},
      {5, width, 1, true, Activation::prelu},
      {5, width, 2, true, Activation::prelu},
      {9, 3, 2, true, Activation::sigmoid},
  };
  spec.validate();
  return spec;
}

}  // namespace codec
}  // namespace jscc
