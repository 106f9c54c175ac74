#pragma once
// Built-in attribute taxonomy covering common text-to-speech and voice
// conversion pipelines: seven generation stages, 25 attributes total. Attack
// rows describe eight synthesis systems; A16 shares A04's recipe and A19
// shares A06's, which makes them natural stand-ins for unknown-attack
// evaluation against their known twins.

#include "attribkit/taxonomy.hpp"

namespace attribkit {

inline const char* default_taxonomy_text() {
  return
      "set Inputs: Text Speech\n"
      "set InputProcessor: NLP WORLD LPCC-MFCC ASR\n"
      "set Duration: HMM FF DTW None\n"
      "set Conversion: AR-RNN FF CART GMM-UBM\n"
      "set Speaker: VAE One-hot None\n"
      "set Outputs: Mel-spec MCC-F0 MFCC-F0 LPC\n"
      "set Waveform: WaveNet WORLD Concat OLA\n"
      "attack A01: Text NLP HMM AR-RNN VAE Mel-spec WaveNet\n"
      "attack A02: Text NLP HMM AR-RNN VAE MCC-F0 WORLD\n"
      "attack A03: Text NLP FF FF One-hot MCC-F0 WORLD\n"
      "attack A04: Text NLP None CART None MFCC-F0 Concat\n"
      "attack A05: Speech WORLD DTW FF VAE MCC-F0 WORLD\n"
      "attack A06: Speech LPCC-MFCC None GMM-UBM None LPC OLA\n"
      "attack A16: Text NLP None CART None MFCC-F0 Concat\n"
      "attack A19: Speech LPCC-MFCC None GMM-UBM None LPC OLA\n";
}

inline const AttributeTaxonomy& default_taxonomy() {
  static const AttributeTaxonomy tax =
      AttributeTaxonomy::parse(default_taxonomy_text());
  return tax;
}

}  // namespace attribkit
