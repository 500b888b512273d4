"""Generate a synthetic set, train briefly, evaluate, and compare the ablation ladder sizes."""
import sys
import tempfile
from pathlib import Path

from odcsa import ABLATION_LADDER, Config, OdcSaNet, train
from odcsa.data import SynthConfig, save_dataset, synth_generate
from odcsa.inference import evaluate_model

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 40
work = Path(tempfile.mkdtemp(prefix="odcsa_demo_"))
ds = synth_generate(SynthConfig(count=8, size=64, seed=0))
save_dataset(ds.samples, work / "data")

cfg = Config(size=64, batch=8, epochs=steps, lr=1e-3, scales=(1.0,), max_steps=steps,
             data_dir=str(work / "data"), ckpt_path=str(work / "model.ckpt"), log_path=str(work / "runlog.csv"))
result = train(cfg, progress=lambda row: row[1] % 10 == 0 and print(f"step {row[1]:4d} loss {row[5]:.4f}"))
print(",".join(evaluate_model(result.model, ds.samples).csv_row("synthetic")))
print(f"run log and checkpoint in {work}")

for key, abl in ABLATION_LADDER.items():
    print(f"config {key}: {OdcSaNet(seed=0, ablation=abl).num_params():,} parameters")
