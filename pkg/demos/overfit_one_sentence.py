"""
Overfitting one sentence
========================

A model trained to saturation on a single sentence must give that sentence
back.  This checks the whole path: features, loss, SGD, argmax, decode and
serialization.
"""

from phrasewin import TrainConfig, parse_annotation, predict, train

gold = parse_annotation("(我)[爱](祖国)")
# a large learning rate and every O cell in the loss
cfg = TrainConfig(epochs=300, lr=1.0, negative_ratio=10_000, hash_bits=12)
model, history = train([gold], None, cfg)
for entry in history[::60]:
    print(entry.line())

pred = predict(model, "我爱祖国")
print(pred.text)
print(pred.grid.to_text())
