"""Shell out to an external encoder/decoder pair described by a CodecSpec.

Commands are run without a shell; templates are shlex-split once and the
``{input}``/``{bitstream}``/``{recon}``/``{q}`` placeholders substituted
per token, so paths with spaces survive.  Every (codec, q, image) works in
its own directory under the configured workdir, which keeps concurrent
transcodes from colliding.
"""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from vcmbench.codecs.base import KIND_EXTERNAL, CodecSpec, EncodedArtifact
from vcmbench.errors import CodecRunError


def resolve_template(template: str, mapping: dict[str, str]) -> list[str]:
    """Split a command template and substitute placeholder tokens."""
    argv = []
    for token in shlex.split(template):
        for name, value in mapping.items():
            token = token.replace("{" + name + "}", value)
        argv.append(token)
    return argv


def _run(argv: list[str], spec: CodecSpec, q: int, stage: str, timeout: float | None) -> None:
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        raise CodecRunError(
            f"{stage} command timed out after {timeout}s", codec=spec.name, quality=q
        ) from None
    except OSError as exc:
        raise CodecRunError(
            f"{stage} command failed to start: {exc}", codec=spec.name, quality=q
        ) from exc
    if proc.returncode != 0:
        raise CodecRunError(
            f"{stage} command exited with status {proc.returncode}",
            codec=spec.name,
            quality=q,
            stderr=proc.stderr,
        )


def external_transcode(
    spec: CodecSpec,
    img_path: str | Path,
    q: int,
    image_id: str | None = None,
    timeout: float | None = None,
) -> tuple[EncodedArtifact, Path]:
    """Encode then decode one image; return the artifact and recon path."""
    if spec.kind != KIND_EXTERNAL:
        raise ValueError(f"codec {spec.name!r} is not external")
    if spec.workdir is None:
        raise ValueError(f"external codec {spec.name!r} has no workdir")
    img_path = Path(img_path)
    if image_id is None:
        image_id = img_path.stem
    stage_dir = spec.workdir / spec.name / str(q) / image_id
    stage_dir.mkdir(parents=True, exist_ok=True)
    bitstream = stage_dir / "stream.bin"
    recon = stage_dir / f"recon{img_path.suffix}"
    mapping = {
        "input": str(img_path),
        "bitstream": str(bitstream),
        "recon": str(recon),
        "q": str(q),
    }

    _run(resolve_template(spec.encode_template, mapping), spec, q, "encode", timeout)
    if not bitstream.is_file():
        raise CodecRunError(
            f"encode command produced no bitstream at {bitstream}",
            codec=spec.name,
            quality=q,
        )
    size = bitstream.stat().st_size
    if size == 0:
        raise CodecRunError(
            "encode command produced a zero-byte bitstream", codec=spec.name, quality=q
        )

    _run(resolve_template(spec.decode_template, mapping), spec, q, "decode", timeout)
    if not recon.is_file():
        raise CodecRunError(
            f"decode command produced no reconstruction at {recon}",
            codec=spec.name,
            quality=q,
        )

    artifact = EncodedArtifact(
        codec_name=spec.name,
        quality_param=q,
        num_bits=8 * size,
        source_image_id=image_id,
        bitstream_path=bitstream,
    )
    return artifact, recon
