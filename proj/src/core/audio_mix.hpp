#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace proxilink::audio {

struct PcmFrame {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 48000;
  std::string participant;
};

// Scales every sample by `gain` (which must lie in [0,1]); output is clamped
// to [-1,1].
PcmFrame apply_gain(const PcmFrame& frame, double gain);

// out[i] = clamp(sum_k gain_k * frame_k[i], -1, 1). The output frame carries
// an empty participant id.
PcmFrame mix(std::span<const PcmFrame> frames, const std::map<std::string, double>& gains);

double rms(std::span<const double> samples);

// 16-bit mono PCM WAV, amplitudes s / 32768.
PcmFrame read_wav(const std::filesystem::path& path, std::string participant = {});
void write_wav(const std::filesystem::path& path, const PcmFrame& frame);

}  // namespace proxilink::audio
