#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "drowsy/lstm.hpp"

namespace drowsy {

// Text checkpoint:
//   drowsy-lstm-autoencoder 1
//   feature_dim <D>
//   hidden_size <H>
//   tensor <name> <rows> <cols>     (repeated; one line per row)
// Values use 17 significant digits, so save/load is exact for doubles.
std::string format_checkpoint(const AutoencoderParams& params);
AutoencoderParams parse_checkpoint(std::string_view text, const std::string& source = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const AutoencoderParams& params);
AutoencoderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace drowsy
