"""Rate sweep: encode/decode every (codec, q, image) and record metrics.

Work items fan out to a bounded thread pool; ledger appends are
serialized inside RunLedger, and every aggregate consumer sorts rows, so
results do not depend on completion order.  Items already marked ok in
the ledger are skipped (config-hash resume); failed items are retried.
A sweep aborts once failures exceed the configured budget share of the
full grid.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

from vcmbench.codecs.base import KIND_BUILTIN, CodecSpec
from vcmbench.codecs.external import external_transcode
from vcmbench.codecs.toy import toy_decode, toy_encode
from vcmbench.errors import SweepAbortedError
from vcmbench.harness.config import ExperimentConfig
from vcmbench.harness.ledger import STATUS_FAILED, STATUS_OK, LedgerRow, RunLedger
from vcmbench.image_io import load_image
from vcmbench.images import PlanarImage
from vcmbench.metrics import psnr, ssim

LEDGER_FILENAME = "ledger.jsonl"
RD_POINTS_FILENAME = "rd_points.csv"

log = logging.getLogger("vcmbench.sweep")


def _run_item(
    spec: CodecSpec, q: int, image_id: str, path: Path, original: PlanarImage
) -> LedgerRow:
    try:
        if spec.kind == KIND_BUILTIN:
            artifact = toy_encode(original, q, image_id)
            recon = toy_decode(artifact)
        else:
            artifact, recon_path = external_transcode(spec, path, q, image_id)
            recon = load_image(recon_path)
        metrics = {"psnr": psnr(original, recon), "ssim": ssim(original, recon)}
        return LedgerRow(
            codec=spec.name,
            q=q,
            image_id=image_id,
            status=STATUS_OK,
            bits=artifact.num_bits,
            pixels=original.num_pixels,
            metrics=metrics,
        )
    except Exception as exc:
        return LedgerRow(
            codec=spec.name, q=q, image_id=image_id, status=STATUS_FAILED, error=str(exc)
        )


def write_rd_points(ledger: RunLedger, csv_path: str | Path) -> None:
    """Dump completed rows as ``codec,q,image_id,bits,bpp,psnr,ssim``."""
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["codec", "q", "image_id", "bits", "bpp", "psnr", "ssim"])
        for row in ledger.ok_rows():
            writer.writerow(
                [
                    row.codec,
                    row.q,
                    row.image_id,
                    row.bits,
                    str(row.bits / row.pixels),
                    str(row.metrics["psnr"]),
                    str(row.metrics["ssim"]),
                ]
            )


def cmd_sweep(config: ExperimentConfig) -> RunLedger:
    """Run the full (codec, q, image) grid and persist the ledger."""
    images = config.list_images()
    originals = {image_id: load_image(path) for image_id, path in images}
    config.output_dir.mkdir(parents=True, exist_ok=True)
    ledger = RunLedger(config.output_dir / LEDGER_FILENAME, config.config_hash)

    grid_size = sum(len(spec.quality_levels) for spec in config.codecs) * len(images)
    pending = []
    for spec in config.codecs:
        for q in spec.quality_levels:
            for image_id, path in images:
                row = ledger.get(spec.name, q, image_id)
                if row is not None and row.status == STATUS_OK:
                    continue
                pending.append((spec, q, image_id, path))
    log.info(
        "sweep: %d of %d grid items to run (%d resumed)",
        len(pending),
        grid_size,
        grid_size - len(pending),
    )

    failures = 0
    allowed = config.failure_budget * grid_size
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [
            pool.submit(_run_item, spec, q, image_id, path, originals[image_id])
            for spec, q, image_id, path in pending
        ]
        try:
            for future in as_completed(futures):
                row = future.result()
                ledger.append(row)
                if row.status == STATUS_FAILED:
                    failures += 1
                    log.warning(
                        "sweep item failed: codec=%s q=%s image=%s: %s",
                        row.codec,
                        row.q,
                        row.image_id,
                        row.error,
                    )
                    if failures > allowed:
                        raise SweepAbortedError(
                            f"{failures} of {grid_size} items failed, over the "
                            f"{config.failure_budget:.0%} budget"
                        )
        finally:
            pool.shutdown(cancel_futures=True)

    write_rd_points(ledger, config.output_dir / RD_POINTS_FILENAME)
    log.info("sweep complete: %d ok rows", len(ledger.ok_rows()))
    return ledger


__all__ = ["cmd_sweep", "write_rd_points", "LEDGER_FILENAME", "RD_POINTS_FILENAME"]
