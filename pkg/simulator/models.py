from django.db import models


class SimulationRun(models.Model):
    """Log mỗi lần chạy một kịch bản mô phỏng"""
    STATUS_CHOICES = [
        ('success', 'Thành công'),
        ('error', 'Lỗi'),
        ('infeasible', 'Không khả thi'),
    ]

    scenario = models.CharField(max_length=20)
    status = models.CharField(max_length=12, choices=STATUS_CHOICES)
    seed = models.CharField(max_length=20, default='0', help_text="Unsigned 64-bit run seed")
    config = models.JSONField(default=dict, help_text="Cấu hình đầy đủ sau khi áp dụng mặc định")
    summary = models.CharField(max_length=500, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    files = models.JSONField(default=list, blank=True)
    error_message = models.TextField(blank=True)
    execution_time = models.FloatField(help_text="Time in seconds")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        verbose_name = "Simulation Run"
        verbose_name_plural = "Simulation Runs"
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.scenario} - {self.get_status_display()} ({self.created_at})"
