#include <algorithm>
#include <array>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <streambuf>

#include "pamforge/audio_ingest.hpp"
#include "pamforge/error.hpp"

namespace pamforge {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// KSDATAFORMAT_SUBTYPE_PCM after the leading format tag.
constexpr std::array<std::uint8_t, 14> kPcmGuidTail = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                                       0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct MemoryBuf : std::streambuf {
  explicit MemoryBuf(std::span<const std::uint8_t> bytes) {
    auto* begin = reinterpret_cast<char*>(const_cast<std::uint8_t*>(bytes.data()));
    setg(begin, begin, begin + bytes.size());
  }
  pos_type seekoff(off_type off, std::ios_base::seekdir dir, std::ios_base::openmode) override {
    char* target = dir == std::ios_base::beg ? eback() + off : dir == std::ios_base::cur ? gptr() + off : egptr() + off;
    if (target < eback() || target > egptr()) return pos_type(off_type(-1));
    setg(eback(), target, egptr());
    return pos_type(target - eback());
  }
  pos_type seekpos(pos_type pos, std::ios_base::openmode mode) override {
    return seekoff(off_type(pos), std::ios_base::beg, mode);
  }
};

void read_exact(std::istream& in, std::uint64_t at, std::uint8_t* out, std::size_t n) {
  in.clear();
  in.seekg(static_cast<std::streamoff>(at));
  in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Error(ErrorCode::IoFailure, "short read in WAV header");
}

struct FmtChunk {
  std::uint16_t channels = 0;
  std::uint32_t sampleRate = 0;
  std::uint16_t blockAlign = 0;
  std::uint16_t bitsPerSample = 0;
};

FmtChunk parse_fmt(std::span<const std::uint8_t> body) {
  if (body.size() < 16) throw Error(ErrorCode::MalformedContainer, "fmt chunk shorter than 16 bytes");
  FmtChunk fmt;
  const std::uint16_t tag = le16(body.data());
  fmt.channels = le16(body.data() + 2);
  fmt.sampleRate = le32(body.data() + 4);
  fmt.blockAlign = le16(body.data() + 12);
  fmt.bitsPerSample = le16(body.data() + 14);
  if (tag == kFormatExtensible) {
    if (body.size() < 40) throw Error(ErrorCode::MalformedContainer, "truncated WAVE_FORMAT_EXTENSIBLE");
    const std::uint16_t sub = le16(body.data() + 24);
    if (sub != kFormatPcm || !std::equal(kPcmGuidTail.begin(), kPcmGuidTail.end(), body.data() + 26))
      throw Error(ErrorCode::UnsupportedEncoding, "extensible subformat is not integer PCM");
  } else if (tag != kFormatPcm) {
    throw Error(ErrorCode::UnsupportedEncoding, "format tag " + std::to_string(tag) + " is not integer PCM");
  }
  if (fmt.bitsPerSample != 16 && fmt.bitsPerSample != 24 && fmt.bitsPerSample != 32)
    throw Error(ErrorCode::UnsupportedEncoding, "unsupported bit depth " + std::to_string(fmt.bitsPerSample));
  if (fmt.channels == 0) throw Error(ErrorCode::MalformedContainer, "zero channels");
  if (fmt.sampleRate == 0) throw Error(ErrorCode::MalformedContainer, "zero sample rate");
  if (fmt.blockAlign != fmt.channels * (fmt.bitsPerSample / 8))
    throw Error(ErrorCode::MalformedContainer, "block align does not match channels x sample size");
  return fmt;
}

}  // namespace

AudioFileMeta parse_wav_header(std::istream& in, std::uint64_t streamSize) {
  std::uint8_t hdr[12];
  if (streamSize < 12) throw Error(ErrorCode::MalformedContainer, "shorter than a RIFF header");
  read_exact(in, 0, hdr, 12);
  if (std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::MalformedContainer, "missing RIFF/WAVE signature");

  std::optional<FmtChunk> fmt;
  std::optional<std::uint64_t> dataOffset;
  std::uint64_t dataSize = 0;

  std::uint64_t pos = 12;
  while (pos < streamSize) {
    if (streamSize - pos < 8) throw Error(ErrorCode::MalformedContainer, "trailing bytes do not form a chunk");
    std::uint8_t ch[8];
    read_exact(in, pos, ch, 8);
    const std::uint64_t size = le32(ch + 4);
    const std::uint64_t body = pos + 8;
    const std::uint64_t remaining = streamSize - body;
    if (std::memcmp(ch, "data", 4) == 0) {
      if (dataOffset) throw Error(ErrorCode::MalformedContainer, "duplicate data chunk");
      if (size > remaining)
        throw Error(ErrorCode::MalformedContainer, "data chunk claims " + std::to_string(size) + " bytes but " +
                                                       std::to_string(remaining) + " remain");
      dataOffset = body;
      dataSize = size;
    } else {
      if (size > remaining) throw Error(ErrorCode::MalformedContainer, "chunk overruns the file");
      if (std::memcmp(ch, "fmt ", 4) == 0) {
        if (fmt) throw Error(ErrorCode::MalformedContainer, "duplicate fmt chunk");
        std::vector<std::uint8_t> buf(size);
        read_exact(in, body, buf.data(), buf.size());
        fmt = parse_fmt(buf);
      }
    }
    // An odd-sized final chunk without its pad byte ends the loop here too.
    pos = body + size + (size & 1u);
  }

  if (!fmt) throw Error(ErrorCode::MalformedContainer, "missing fmt chunk");
  if (!dataOffset) throw Error(ErrorCode::MalformedContainer, "missing data chunk");
  if (dataSize % fmt->blockAlign != 0)
    throw Error(ErrorCode::MalformedContainer, "data length is not a whole number of sample frames");

  AudioFileMeta meta;
  meta.sampleRateHz = fmt->sampleRate;
  meta.bitDepth = fmt->bitsPerSample;
  meta.channels = fmt->channels;
  meta.totalSamples = dataSize / fmt->blockAlign;
  meta.byteOffsetToData = *dataOffset;
  return meta;
}

AudioFileMeta parse_wav_header(std::span<const std::uint8_t> rawBytes) {
  MemoryBuf buf(rawBytes);
  std::istream in(&buf);
  return parse_wav_header(in, rawBytes.size());
}

AudioFileMeta read_wav_meta(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot stat " + path.string() + ": " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  AudioFileMeta meta = parse_wav_header(in, size);
  meta.path = path.string();
  return meta;
}

void assign_start_times(std::span<AudioFileMeta> files, const TimestampPattern& pattern) {
  // Fallback files are chained in the order they appear, starting at the epoch.
  UtcTime cursor{};
  for (auto& f : files) {
    const auto name = std::filesystem::path(f.path).filename().string();
    if (auto t = pattern.match(name)) {
      f.startTime = *t;
      continue;
    }
    f.startTime = cursor;
    const auto ns = static_cast<__int128>(f.totalSamples) * 1'000'000'000 / f.sampleRateHz;
    cursor += std::chrono::nanoseconds(static_cast<std::int64_t>(ns));
  }
}

RecordPlan plan_records(const AudioFileMeta& meta, const Rational& recordSizeSec) {
  if (!recordSizeSec.positive()) throw Error(ErrorCode::NonIntegerRecordLength, "record size must be positive");
  const auto samples = recordSizeSec.times_integer(meta.sampleRateHz);
  if (!samples || *samples <= 0)
    throw Error(ErrorCode::NonIntegerRecordLength, recordSizeSec.to_string() + " s x " +
                                                       std::to_string(meta.sampleRateHz) +
                                                       " Hz is not a whole number of samples");
  RecordPlan plan;
  plan.recordSizeSec = recordSizeSec;
  plan.recordSizeSamples = static_cast<std::uint64_t>(*samples);
  plan.recordCount = meta.totalSamples / plan.recordSizeSamples;
  plan.droppedTailSamples = meta.totalSamples % plan.recordSizeSamples;
  plan.offsets.reserve(plan.recordCount);
  for (std::uint64_t i = 0; i < plan.recordCount; ++i) plan.offsets.push_back({i, i * plan.recordSizeSamples});
  return plan;
}

void decode_pcm(std::span<const std::uint8_t> raw, std::uint16_t bitDepth, std::uint16_t channels,
                std::span<double> out) {
  const std::size_t stride = static_cast<std::size_t>(bitDepth / 8) * channels;
  if (raw.size() < out.size() * stride) throw Error(ErrorCode::LengthMismatch, "not enough PCM bytes to decode");
  const std::uint8_t* p = raw.data();
  switch (bitDepth) {
    case 16:
      for (std::size_t i = 0; i < out.size(); ++i, p += stride)
        out[i] = static_cast<std::int16_t>(le16(p)) / 32768.0;
      break;
    case 24:
      for (std::size_t i = 0; i < out.size(); ++i, p += stride) {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) v -= 0x1000000;
        out[i] = v / 8388608.0;
      }
      break;
    case 32:
      for (std::size_t i = 0; i < out.size(); ++i, p += stride)
        out[i] = static_cast<std::int32_t>(le32(p)) / 2147483648.0;
      break;
    default:
      throw Error(ErrorCode::UnsupportedEncoding, "unsupported bit depth " + std::to_string(bitDepth));
  }
}

RecordReader::RecordReader(const AudioFileMeta& meta, ChannelPolicy policy) : meta_(&meta) {
  if (policy == ChannelPolicy::RejectMultichannel && meta.channels > 1)
    throw Error(ErrorCode::MultichannelInput, meta.path + " has " + std::to_string(meta.channels) + " channels");
  in_.open(meta.path, std::ios::binary);
  if (!in_) throw Error(ErrorCode::IoFailure, "cannot open " + meta.path);
}

SampleBuffer RecordReader::read(const RecordPlan& plan, std::uint64_t recordIndex) {
  if (recordIndex >= plan.recordCount)
    throw Error(ErrorCode::IndexOutOfRange, "record " + std::to_string(recordIndex) + " of " +
                                                std::to_string(plan.recordCount));
  const auto& meta = *meta_;
  const std::uint64_t first = plan.offsets[recordIndex].firstSampleIndex;
  const std::size_t n = plan.recordSizeSamples;
  raw_.resize(n * meta.block_align());
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(meta.byteOffsetToData + first * meta.block_align()));
  in_.read(reinterpret_cast<char*>(raw_.data()), static_cast<std::streamsize>(raw_.size()));
  if (static_cast<std::size_t>(in_.gcount()) != raw_.size())
    throw Error(ErrorCode::IoFailure, "short read of record " + std::to_string(recordIndex) + " in " + meta.path);

  SampleBuffer buf;
  buf.samples.resize(n);
  buf.recordIndex = recordIndex;
  const auto ns = static_cast<__int128>(first) * 1'000'000'000 / meta.sampleRateHz;
  buf.timestamp = meta.startTime + std::chrono::nanoseconds(static_cast<std::int64_t>(ns));
  decode_pcm(raw_, meta.bitDepth, meta.channels, buf.samples);
  return buf;
}

SampleBuffer read_record(const AudioFileMeta& meta, const RecordPlan& plan, std::uint64_t recordIndex,
                         ChannelPolicy policy) {
  RecordReader reader(meta, policy);
  return reader.read(plan, recordIndex);
}

}  // namespace pamforge
