from django.db import models


class ExperimentRun(models.Model):
    """One recorded invocation of a pipeline command"""
    command = models.CharField(max_length=32)
    # decimal text; seeds span the full unsigned 64-bit range
    seed = models.CharField(max_length=20, null=True, blank=True)
    parameters = models.JSONField(default=dict)
    success = models.BooleanField(default=False)
    residual = models.IntegerField(null=True, blank=True)
    seconds = models.FloatField(null=True, blank=True)
    summary = models.JSONField(default=dict)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ('-created_at',)
        indexes = [models.Index(fields=['command', 'seed'], name='core_run_command_seed_idx')]

    def __str__(self):
        outcome = 'ok' if self.success else 'failed'
        return f'{self.command} seed={self.seed} ({outcome})'

    @classmethod
    def record(cls, command, seed, parameters, summary, seconds=None):
        return cls.objects.create(
            command=command,
            seed=None if seed is None else str(int(seed)),
            parameters=parameters,
            success=bool(summary.get('success', True)),
            residual=summary.get('residual'),
            seconds=seconds,
            summary=summary,
        )
