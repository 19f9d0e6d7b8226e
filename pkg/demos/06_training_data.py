"""Build training examples and score them with the in-scope losses.

A synthetic pair renders the same content through two speaker filters.
Role sampling decides which rendering drives and which supervises, a
random hop-aligned segment is cropped, and that segment is excised from
the conditioning audio so the model can never read its own answer.
"""
import numpy as np

from latentvc import (
    RoleMode,
    RoleProbs,
    assemble_supervision,
    assign_roles,
    loss_breakdown,
    make_example,
    sample_mode,
    synth_pair,
)

pair = synth_pair(content_seed=11, speaker_a=5, speaker_b=6, duration_s=4.8)
print(f"pair: two {pair.real.duration_s:.1f} s renderings of the same content")

probs = RoleProbs(0.4, 0.2, 0.4)
rng = np.random.default_rng(6)
counts = {m: 0 for m in RoleMode}
for _ in range(10_000):
    counts[sample_mode(probs, rng)] += 1
print("role frequencies over 10k draws:",
      {m.value: round(n / 10_000, 3) for m, n in counts.items()})

mode = sample_mode(probs, rng)
source_utt, target_utt = assign_roles(pair, mode)
ex = make_example(source_utt, target_utt, rng, mode=mode)
print(f"example mode={ex.mode.value}, segment starts at sample {ex.segment_start}")
print(f"  source segment {len(ex.source_seg)}, target segment {len(ex.target_seg)}, "
      f"condition {len(ex.cond_wave)} samples")

z_src, c, g, z_tgt, mel_tgt = assemble_supervision(ex)
print(f"supervision tensors: z_src {z_src.shape}, cond mel {c.shape}, "
      f"speaker {g.shape}, z_tgt {z_tgt.shape}, target mel {mel_tgt.shape}")

lb = loss_breakdown(pair.generated, pair.real)
print("loss between the two renderings:", lb.to_dict())
lb0 = loss_breakdown(pair.real, pair.real)
print(f"loss of a perfect prediction: {lb0.total}")
