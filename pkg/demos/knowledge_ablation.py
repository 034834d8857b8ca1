"""
Does lexicon knowledge help?
============================

Train the same tagger three ways on a synthetic corpus: with knowledge
features over all hit lengths, with hits capped at length 5, and without
any knowledge.  A smaller corpus than the acceptance run keeps this quick.
"""

import time

from phrasewin import SynthConfig, TrainConfig, evaluate_spans, predict_corpus, split_corpus, synth_corpus, train

corpus, lexicon = synth_corpus(SynthConfig(seed=7, n=2400, noise_rate=0.3))
train_part, test_part = split_corpus(corpus, 0.25, seed=7)
print(len(train_part), "train /", len(test_part), "test sentences,", len(lexicon), "lexicon entries")

for label, kw in [("knowledge d_max=50", {}), ("knowledge d_max=5", {"d_max": 5}),
                  ("no knowledge", {"use_knowledge": False})]:
    t0 = time.perf_counter()
    cfg = TrainConfig(epochs=10, seed=3, **kw)
    model, _ = train(train_part, lexicon, cfg)
    preds = predict_corpus(model, [s.text for s in test_part], lexicon)
    report = evaluate_spans(test_part, [p.annotation for p in preds], [p.report for p in preds])
    print(f"{label:20} F1 {100 * report.micro.f1:6.2f}   ({time.perf_counter() - t0:.1f}s)")

# per-type breakdown of the last run, without knowledge
print(report.to_table(compare_published=True))
