#include "audio_mix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace proxilink::audio {

namespace {

void check_gain(double gain) {
  if (!(gain >= 0.0 && gain <= 1.0)) throw Error(ErrorCode::Domain, "gain must lie in [0,1]");
}

void check_samples(const PcmFrame& frame) {
  for (double s : frame.samples)
    if (!std::isfinite(s)) throw Error(ErrorCode::Domain, "frame contains a non-finite sample");
}

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

PcmFrame apply_gain(const PcmFrame& frame, double gain) {
  check_gain(gain);
  check_samples(frame);
  PcmFrame out{frame.samples, frame.sample_rate_hz, frame.participant};
  for (double& s : out.samples) s = std::clamp(s * gain, -1.0, 1.0);
  return out;
}

PcmFrame mix(std::span<const PcmFrame> frames, const std::map<std::string, double>& gains) {
  if (frames.empty()) throw Error(ErrorCode::Format, "mix needs at least one frame");
  const auto length = frames.front().samples.size();
  const auto rate = frames.front().sample_rate_hz;
  std::vector<double> frame_gains;
  frame_gains.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.samples.size() != length || f.sample_rate_hz != rate)
      throw Error(ErrorCode::Format, "frames differ in length or sample rate");
    check_samples(f);
    auto it = gains.find(f.participant);
    if (it == gains.end()) throw Error(ErrorCode::NotFound, "no gain for participant '" + f.participant + "'");
    check_gain(it->second);
    frame_gains.push_back(it->second);
  }

  PcmFrame out{std::vector<double>(length, 0.0), rate, {}};
  for (std::size_t k = 0; k < frames.size(); ++k)
    for (std::size_t i = 0; i < length; ++i) out.samples[i] += frame_gains[k] * frames[k].samples[i];
  for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  return out;
}

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  long double acc = 0.0;
  for (double s : samples) acc += static_cast<long double>(s) * s;
  return static_cast<double>(std::sqrt(acc / samples.size()));
}

PcmFrame read_wav(const std::filesystem::path& path, std::string participant) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::Format, "not a RIFF/WAVE file");

  PcmFrame frame;
  frame.participant = std::move(participant);
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw Error(ErrorCode::Format, "truncated WAV chunk");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::Format, "short fmt chunk");
      if (read_u16(p + body) != 1 || read_u16(p + body + 2) != 1 || read_u16(p + body + 14) != 16)
        throw Error(ErrorCode::Format, "only 16-bit mono PCM is supported");
      frame.sample_rate_hz = read_u32(p + body + 4);
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::Format, "data chunk before fmt chunk");
      frame.samples.reserve(size / 2);
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        const auto raw = static_cast<std::int16_t>(read_u16(p + body + i));
        frame.samples.push_back(raw / 32768.0);
      }
      return frame;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorCode::Format, "WAV file has no data chunk");
}

void write_wav(const std::filesystem::path& path, const PcmFrame& frame) {
  const auto data_bytes = static_cast<std::uint32_t>(frame.samples.size() * 2);
  std::string out = "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, frame.sample_rate_hz);
  put_u32(out, frame.sample_rate_hz * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : frame.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace proxilink::audio
