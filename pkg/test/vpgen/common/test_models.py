from test.base import BaseTest
from vpgen.common.models import MANIFEST_FILENAME, Manifest, config_sha256


class ConfigSha256Tests(BaseTest):
    def test__config_sha256__ignores_key_order(self):
        self.assertEqual(
            config_sha256({"kind": "sweep", "n0": 10}), config_sha256({"n0": 10, "kind": "sweep"})
        )

    def test__config_sha256__differs_on_content(self):
        self.assertNotEqual(config_sha256({"n0": 10}), config_sha256({"n0": 11}))


class ManifestTests(BaseTest):
    def test__finish__sets_time_and_failures(self):
        manifest = Manifest(config_sha256="abc", version="0.1.0")
        self.assertIsNone(manifest.finished)
        manifest.finish([{"width": 0.5, "error": "boom"}])
        self.assertIsNotNone(manifest.finished)
        self.assertGreaterEqual(manifest.finished, manifest.started)
        self.assertEqual(manifest.failures, [{"width": 0.5, "error": "boom"}])

    def test__finish__without_failures_keeps_empty_list(self):
        manifest = Manifest(config_sha256="abc", version="0.1.0").finish()
        self.assertEqual(manifest.failures, [])

    def test__write__read_back(self):
        output_dir = self.tmp_path()
        manifest = Manifest(config_sha256="abc", version="0.1.0").finish(
            [{"width": 0.25, "error": "diverged"}]
        )
        path = manifest.write(output_dir)
        self.assertEqual(path.name, MANIFEST_FILENAME)
        self.assertEqual(Manifest.read(output_dir), manifest)
